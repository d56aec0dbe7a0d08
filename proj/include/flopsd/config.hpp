#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flopsd/dataset.hpp"
#include "flopsd/net.hpp"
#include "flopsd/vec2.hpp"

namespace flopsd {

// Experiment configuration, read from a flat text file of `key = value` lines
// with `#` comments. Unknown and duplicate keys are errors. Every key has a
// default, so an empty file is a valid config.
struct RunConfig {
    // experiment
    uint64_t seed = 1;
    std::string out_dir = "runs/default";
    std::string scenario = "customize";  // customize | domain-shift

    // dataset
    int n_classes = 4;
    std::vector<Vec2> mode_centers = {{2, 2}, {-2, 2}, {-2, -2}, {2, -2}};
    double mode_std = 0.4;
    int samples_per_class = 2000;
    int shift_label = 0;
    Vec2 shift_center = {4, 0};
    int n_tune_pairs = 4;

    // domain-shift scenario
    double domain_angle_deg = 30.0;
    double domain_scale = 1.3;
    int domain_holdout_label = 3;
    int domain_pairs_per_class = 64;

    // model
    std::vector<int> hidden = {64, 64};
    std::string activation = "silu";
    int schedule_k = 8;

    // pretraining (flow matching with context dropout)
    int pretrain_iters = 20000;
    int pretrain_batch = 128;
    double pretrain_lr = 1e-3;
    double pretrain_lr_end = 1e-5;  // cosine decay target; set equal to lr for constant
    double context_dropout = 0.5;

    // step distillation
    int distill_iters = 3000;
    int distill_batch = 64;
    double distill_lr = 1e-3;
    double distill_lr_end = 1e-4;  // cosine decay target; equal to lr = constant
    int distill_pool = 4096;

    // tuning arms
    int tune_iters = 1000;
    int tune_batch = 32;
    double tune_lr = 3e-4;
    double tune_lr_end = 3e-4;  // cosine decay target; equal to lr = constant
    // Adam epsilon for the tuning stage. Raised well above the classic 1e-8 so
    // that arms whose objective actually reaches a fixed point stop moving;
    // with 1e-8 Adam's normalized steps keep random-walking the weights at lr
    // scale long after convergence, which buries the method comparison in
    // optimizer noise at these parameter counts.
    double tune_eps = 1e-3;
    std::string teacher_mode = "ema";  // ema | frozen_base | student_copy
    double ema_momentum = 0.9999;
    std::string teacher_cond = "teacher";    // teacher | student (ablation)
    std::string teacher_params = "teacher";  // teacher | student (ablation)
    bool offpolicy_random_t = false;
    int sft_teacher_refresh = 1;

    // evaluation
    int eval_period = 100;
    int eval_samples = 512;
    int sw_projections = 64;
    int dense_steps = 200;
    int log_period = 100;

    // ablate
    std::vector<uint64_t> ablate_seeds = {1, 2, 3, 4, 5};

    static RunConfig parse(const std::string& text);       // throws UsageError
    static RunConfig parse_file(const std::string& path);  // throws UsageError

    // Every key in fixed order with full-precision values; hashing this text
    // gives the config hash recorded in run manifests.
    std::string canonical_text() const;
    uint64_t hash() const;

    DatasetSpec dataset_spec() const;
    void validate() const;  // throws UsageError on out-of-range values
};

std::string format_double(double v);  // shortest round-trip-exact decimal

}  // namespace flopsd

#pragma once

#include <span>
#include <vector>

#include "flopsd/flow.hpp"
#include "flopsd/rng.hpp"
#include "flopsd/sampler.hpp"
#include "flopsd/trainlog.hpp"

namespace flopsd {

struct DistillConfig {
    int iters = 3000;
    int batch = 64;
    double lr = 1e-3;
    double lr_end = 1e-4;  // cosine decay target
    int pool = 4096;       // precomputed dense trajectories
    int substeps = 0;      // dense sub-steps per segment; 0 = ceil(200 / K)
};

// Pool of dense-solve trajectories of the base field, sampled at the schedule
// times. These are the regression targets for few-step distillation; the base
// field is never updated.
struct DistillTargets {
    struct Entry {
        int label = 0;
        std::vector<Vec2> states;  // schedule.steps() + 1 states, t_K ... t_0
    };
    std::vector<Entry> entries;
};

DistillTargets make_distill_targets(const VelocityField& base, const Schedule& schedule,
                                    int n_entries, int substeps, Rng& rng);

// Same pool built from an arbitrary conditional velocity callable
// vel(label, x, t); used by tests with analytic fields.
template <class F>
DistillTargets make_distill_targets_fn(F&& vel, int n_classes, const Schedule& schedule,
                                       int n_entries, int substeps, Rng& rng) {
    DistillTargets targets;
    targets.entries.reserve(n_entries);
    for (int i = 0; i < n_entries; ++i) {
        DistillTargets::Entry e;
        e.label = rng.uniform_int(n_classes);
        const Vec2 noise = rng.normal2();
        e.states = dense_schedule_states_fn(
            [&](const Vec2& x, double t) { return vel(e.label, x, t); }, schedule, noise,
            substeps);
        targets.entries.push_back(std::move(e));
    }
    return targets;
}

// Segment-wise chord regression loss: mean over (entries x segments) of
// || x_k + (t_{k-1} - t_k) * v(x_k, t_k, c_s) - x_{k-1} ||^2.
// Overwrites grad with the exact gradient when non-empty.
double segment_loss_and_grad(const VelocityField& field, const Schedule& schedule,
                             const DistillTargets& targets, std::span<const int> entry_indices,
                             std::span<double> grad);

double segment_loss(const VelocityField& field, const Schedule& schedule,
                    const DistillTargets& targets);

struct DistillResult {
    VelocityField field;
    TrainLog log;
};

// Distills the base field into a few-step model on the given schedule. The
// distilled model is initialized from the base parameters; conditioning is
// student-only (flag 0), matching deployment.
DistillResult distill_few_step(const VelocityField& base, const Schedule& schedule,
                               const DistillConfig& cfg, Rng& rng);

}  // namespace flopsd

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace flopsd {

struct VelocityField;

// Periodic evaluation snapshot attached to training rows. Fields left NaN are
// written as empty CSV cells.
struct EvalMetrics {
    double concept_score = std::numeric_limits<double>::quiet_NaN();
    double quality_proxy = std::numeric_limits<double>::quiet_NaN();
    double sw2_target = std::numeric_limits<double>::quiet_NaN();
    double energy_retained = std::numeric_limits<double>::quiet_NaN();
};

struct TrainRow {
    int64_t iter = 0;
    double loss = std::numeric_limits<double>::quiet_NaN();
    bool has_eval = false;
    EvalMetrics eval;
};

struct TrainLog {
    std::string method;
    uint64_t descriptor_hash = 0;  // shared across arms of one comparative run
    std::vector<TrainRow> rows;

    double first_loss() const { return rows.empty() ? 0.0 : rows.front().loss; }
    double last_loss() const { return rows.empty() ? 0.0 : rows.back().loss; }

    // Moving average of the loss over `window` rows ending at `end` inclusive.
    double moving_average_loss(size_t end, size_t window) const {
        if (rows.empty()) return 0.0;
        if (end >= rows.size()) end = rows.size() - 1;
        const size_t begin = end + 1 >= window ? end + 1 - window : 0;
        double acc = 0.0;
        for (size_t i = begin; i <= end; ++i) acc += rows[i].loss;
        return acc / static_cast<double>(end - begin + 1);
    }
};

// Called with the current student and iteration; returns metric values to
// attach to the log. Implemented by the harness, which owns references and
// sample caches; trainers only know the signature.
using EvalCallback = std::function<EvalMetrics(const VelocityField& student, int64_t iter)>;

// Shared knobs for all tuning arms. Comparative runs pass identical values to
// every arm (enforced through the descriptor hash).
struct TuneConfig {
    int iters = 1000;
    int batch = 32;
    double lr = 3e-4;
    double lr_end = 3e-4;            // cosine decay target; equal to lr = constant
    double adam_eps = 1e-3;          // see RunConfig::tune_eps
    int eval_period = 100;           // 0 disables periodic eval
    int sft_teacher_refresh = 1;     // iterations between teacher-sample refreshes
    bool offpolicy_random_t = false; // draw t ~ U(0,1) instead of schedule times
    uint64_t descriptor_hash = 0;
};

}  // namespace flopsd

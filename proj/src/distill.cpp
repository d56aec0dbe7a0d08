#include "flopsd/distill.hpp"

#include <cmath>

#include "flopsd/errors.hpp"

namespace flopsd {

DistillTargets make_distill_targets(const VelocityField& base, const Schedule& schedule,
                                    int n_entries, int substeps, Rng& rng) {
    FieldEval eval(base);
    std::vector<Condition> conds;
    conds.reserve(base.n_classes);
    for (int y = 0; y < base.n_classes; ++y) conds.push_back(encode_student(y, base.n_classes));
    return make_distill_targets_fn(
        [&](int label, const Vec2& x, double t) { return eval(x, t, conds[label]); },
        base.n_classes, schedule, n_entries, substeps, rng);
}

namespace {

double segment_pass(const VelocityField& field, const Schedule& schedule,
                    const DistillTargets& targets, std::span<const int> entry_indices,
                    std::span<double> grad) {
    if (entry_indices.empty()) throw std::invalid_argument("segment loss: empty batch");
    const int k = schedule.steps();
    FieldEval eval(field);
    std::vector<Condition> conds;
    conds.reserve(field.n_classes);
    for (int y = 0; y < field.n_classes; ++y) conds.push_back(encode_student(y, field.n_classes));

    const double scale = 1.0 / (static_cast<double>(entry_indices.size()) * k);
    double loss = 0.0;
    double upstream[2];
    for (int idx : entry_indices) {
        const auto& entry = targets.entries[static_cast<size_t>(idx)];
        const Condition& c = conds[entry.label];
        for (int i = 0; i < k; ++i) {
            const double t_hi = schedule.at(i);
            const double t_lo = schedule.at(i + 1);
            const Vec2 x = entry.states[static_cast<size_t>(i)];
            const Vec2 target = entry.states[static_cast<size_t>(i) + 1];
            const Vec2 v = eval(x, t_hi, c);
            const Vec2 r = euler_step(x, t_hi, t_lo, v) - target;
            loss += scale * r.squared_norm();
            if (!grad.empty()) {
                const double dstep = 2.0 * scale * (t_lo - t_hi);
                upstream[0] = dstep * r.x;
                upstream[1] = dstep * r.y;
                eval.backward(upstream, grad);
            }
        }
    }
    if (!std::isfinite(loss)) throw NumericError("distill: non-finite loss");
    return loss;
}

}  // namespace

double segment_loss_and_grad(const VelocityField& field, const Schedule& schedule,
                             const DistillTargets& targets, std::span<const int> entry_indices,
                             std::span<double> grad) {
    if (static_cast<int>(grad.size()) != param_count(field.spec)) {
        throw std::invalid_argument("segment loss: grad size mismatch");
    }
    for (double& g : grad) g = 0.0;
    return segment_pass(field, schedule, targets, entry_indices, grad);
}

double segment_loss(const VelocityField& field, const Schedule& schedule,
                    const DistillTargets& targets) {
    std::vector<int> all(targets.entries.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return segment_pass(field, schedule, targets, all, {});
}

DistillResult distill_few_step(const VelocityField& base, const Schedule& schedule,
                               const DistillConfig& cfg, Rng& rng) {
    base.validate();
    schedule.validate();
    if (cfg.iters < 0 || cfg.batch < 1 || cfg.pool < 1) {
        throw std::invalid_argument("distill: bad config");
    }
    const int substeps =
        cfg.substeps > 0 ? cfg.substeps
                         : (200 + schedule.steps() - 1) / schedule.steps();  // ceil(200/K)

    DistillResult res;
    res.field = base;  // initialize student from base parameters
    res.log.method = "distill";

    const DistillTargets targets = make_distill_targets(base, schedule, cfg.pool, substeps, rng);

    AdamState adam;
    adam.reset(res.field.params.size());
    GradVector grad(res.field.params.size(), 0.0);
    std::vector<int> batch(cfg.batch);

    for (int it = 0; it < cfg.iters; ++it) {
        for (int& b : batch) b = rng.uniform_int(cfg.pool);
        const double loss = segment_loss_and_grad(res.field, schedule, targets, batch, grad);
        const AdamConfig adam_cfg{.lr = cosine_lr(cfg.lr, cfg.lr_end, it, cfg.iters)};
        adam_update(res.field.params, grad, adam, adam_cfg);
        res.log.rows.push_back({it, loss, false, {}});
    }
    return res;
}

}  // namespace flopsd

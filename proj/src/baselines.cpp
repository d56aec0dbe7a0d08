#include "flopsd/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "flopsd/errors.hpp"

namespace flopsd {

namespace {

void sample_batch(std::span<const TrainingPair> dataset, std::vector<TrainingPair>& batch,
                  Rng& rng) {
    for (auto& tp : batch) {
        tp = dataset[static_cast<size_t>(rng.uniform_int(static_cast<int>(dataset.size())))];
    }
}

TrainRow maybe_eval_row(const EvalCallback& eval, const VelocityField& student, int it,
                        int eval_period) {
    TrainRow row;
    row.iter = it;
    if (eval && eval_period > 0 && it % eval_period == 0) {
        row.eval = eval(student, it);
        row.has_eval = true;
    }
    return row;
}

}  // namespace

TrainLog sft_train(VelocityField& field, std::span<const TrainingPair> dataset,
                   const TuneConfig& cfg, Rng& rng, const EvalCallback& eval) {
    if (dataset.empty()) throw std::invalid_argument("sft_train: empty dataset");
    field.validate();

    TrainLog log;
    log.method = "sft";
    log.descriptor_hash = cfg.descriptor_hash;

    AdamState adam;
    adam.reset(field.params.size());
    std::vector<TrainingPair> batch(static_cast<size_t>(cfg.batch));

    for (int it = 0; it < cfg.iters; ++it) {
        TrainRow row = maybe_eval_row(eval, field, it, cfg.eval_period);
        sample_batch(dataset, batch, rng);
        FmLossResult step = fm_loss_and_grad(field, batch, CondMode::kStudent, 0.0, rng);
        const AdamConfig adam_cfg{.lr = cosine_lr(cfg.lr, cfg.lr_end, it, cfg.iters),
                                  .eps = cfg.adam_eps};
        adam_update(field.params, step.grad, adam, adam_cfg);
        row.loss = step.loss;
        log.rows.push_back(row);
    }

    if (eval && cfg.eval_period > 0) {
        TrainRow row;
        row.iter = cfg.iters;
        row.eval = eval(field, cfg.iters);
        row.has_eval = true;
        sample_batch(dataset, batch, rng);
        row.loss = fm_loss_and_grad(field, batch, CondMode::kStudent, 0.0, rng).loss;
        log.rows.push_back(row);
    }
    return log;
}

std::vector<Vec2> generate_teacher_targets(const VelocityField& teacher,
                                           std::span<const TrainingPair> dataset,
                                           const Schedule& schedule, Rng& rng) {
    FieldEval eval(teacher);
    std::vector<Vec2> targets;
    targets.reserve(dataset.size());
    for (const TrainingPair& tp : dataset) {
        const Condition c_t = encode_teacher(tp.label, tp.target, teacher.n_classes);
        const Vec2 noise = rng.normal2();
        const Trajectory traj = rollout_fn(
            [&](const Vec2& x, double t) { return eval(x, t, c_t); }, schedule, noise);
        targets.push_back(traj.states.back());
    }
    return targets;
}

TrainLog sft_from_teacher_samples_train(EmaPair& pair, std::span<const TrainingPair> dataset,
                                        const Schedule& schedule, const TuneConfig& cfg, Rng& rng,
                                        const EvalCallback& eval) {
    if (dataset.empty()) throw std::invalid_argument("sft_from_teacher_samples: empty dataset");
    if (cfg.sft_teacher_refresh < 1) {
        throw std::invalid_argument("sft_from_teacher_samples: refresh period must be >= 1");
    }
    pair.validate();

    TrainLog log;
    log.method = "sft-teacher";
    log.descriptor_hash = cfg.descriptor_hash;

    AdamState adam;
    adam.reset(pair.student.params.size());
    std::vector<TrainingPair> generated(dataset.begin(), dataset.end());
    std::vector<TrainingPair> batch(static_cast<size_t>(cfg.batch));

    for (int it = 0; it < cfg.iters; ++it) {
        TrainRow row = maybe_eval_row(eval, pair.student, it, cfg.eval_period);
        if (it % cfg.sft_teacher_refresh == 0) {
            const std::vector<Vec2> targets =
                generate_teacher_targets(pair.teacher, dataset, schedule, rng);
            for (size_t i = 0; i < generated.size(); ++i) generated[i].target = targets[i];
        }
        sample_batch(generated, batch, rng);
        FmLossResult step = fm_loss_and_grad(pair.student, batch, CondMode::kStudent, 0.0, rng);
        const AdamConfig adam_cfg{.lr = cosine_lr(cfg.lr, cfg.lr_end, it, cfg.iters),
                                  .eps = cfg.adam_eps};
        adam_update(pair.student.params, step.grad, adam, adam_cfg);
        ema_update(pair);
        row.loss = step.loss;
        log.rows.push_back(row);
    }

    if (eval && cfg.eval_period > 0) {
        TrainRow row;
        row.iter = cfg.iters;
        row.eval = eval(pair.student, cfg.iters);
        row.has_eval = true;
        sample_batch(generated, batch, rng);
        row.loss = fm_loss_and_grad(pair.student, batch, CondMode::kStudent, 0.0, rng).loss;
        log.rows.push_back(row);
    }
    return log;
}

double offpolicy_loss(const EmaPair& pair, std::span<const TrainingPair> batch,
                      const Schedule& schedule, bool random_t, Rng& rng,
                      std::span<double> grad, const OpsdOptions& options) {
    if (batch.empty()) throw std::invalid_argument("offpolicy_loss: empty batch");
    if (grad.size() != pair.student.params.size()) {
        throw std::invalid_argument("offpolicy_loss: grad size mismatch");
    }
    schedule.validate();

    const int k = schedule.steps();
    const VelocityField& teacher_field =
        options.teacher_params == BranchSource::kTeacher ? pair.teacher : pair.student;
    FieldEval student_eval(pair.student);
    FieldEval teacher_eval(teacher_field);

    for (double& g : grad) g = 0.0;
    const double scale = 1.0 / (static_cast<double>(batch.size()) * k);
    double loss = 0.0;
    double upstream[2];

    for (const TrainingPair& tp : batch) {
        const Condition c_s = encode_student(tp.label, pair.student.n_classes);
        const Condition c_t_full = encode_teacher(tp.label, tp.target, pair.student.n_classes);
        const Condition& c_teacher =
            options.teacher_cond == BranchSource::kTeacher ? c_t_full : c_s;
        const Vec2 eps = rng.normal2();
        for (int i = 0; i < k; ++i) {
            const double t = random_t ? rng.uniform() : schedule.at(i);
            const Vec2 x = interpolate(tp.target, eps, t);  // offline state, not a roll-out
            const Vec2 u_s = student_eval(x, t, c_s);
            const Vec2 u_t = teacher_eval(x, t, c_teacher);
            const Vec2 r = u_s - u_t;
            loss += scale * r.squared_norm();
            upstream[0] = 2.0 * scale * r.x;
            upstream[1] = 2.0 * scale * r.y;
            student_eval.backward(upstream, grad);
        }
    }
    if (!std::isfinite(loss)) throw NumericError("offpolicy_loss: non-finite loss");
    return loss;
}

TrainLog offpolicy_distill_train(EmaPair& pair, std::span<const TrainingPair> dataset,
                                 const Schedule& schedule, const TuneConfig& cfg, Rng& rng,
                                 const OpsdOptions& options, const EvalCallback& eval) {
    if (dataset.empty()) throw std::invalid_argument("offpolicy_distill: empty dataset");
    pair.validate();

    TrainLog log;
    log.method = "offpolicy";
    log.descriptor_hash = cfg.descriptor_hash;

    AdamState adam;
    adam.reset(pair.student.params.size());
    GradVector grad(pair.student.params.size(), 0.0);
    std::vector<TrainingPair> batch(static_cast<size_t>(cfg.batch));

    for (int it = 0; it < cfg.iters; ++it) {
        TrainRow row = maybe_eval_row(eval, pair.student, it, cfg.eval_period);
        sample_batch(dataset, batch, rng);
        const double loss =
            offpolicy_loss(pair, batch, schedule, cfg.offpolicy_random_t, rng, grad, options);
        const AdamConfig adam_cfg{.lr = cosine_lr(cfg.lr, cfg.lr_end, it, cfg.iters),
                                  .eps = cfg.adam_eps};
        adam_update(pair.student.params, grad, adam, adam_cfg);
        ema_update(pair);
        row.loss = loss;
        log.rows.push_back(row);
    }

    if (eval && cfg.eval_period > 0) {
        TrainRow row;
        row.iter = cfg.iters;
        row.eval = eval(pair.student, cfg.iters);
        row.has_eval = true;
        sample_batch(dataset, batch, rng);
        row.loss =
            offpolicy_loss(pair, batch, schedule, cfg.offpolicy_random_t, rng, grad, options);
        log.rows.push_back(row);
    }
    return log;
}

}  // namespace flopsd

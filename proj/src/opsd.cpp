#include "flopsd/opsd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "flopsd/errors.hpp"

namespace flopsd {

TeacherMode teacher_mode_from_string(std::string_view s) {
    if (s == "ema") return TeacherMode::kEma;
    if (s == "frozen_base") return TeacherMode::kFrozenBase;
    if (s == "student_copy") return TeacherMode::kStudentCopy;
    throw std::invalid_argument("unknown teacher mode: " + std::string(s));
}

std::string_view to_string(TeacherMode m) {
    switch (m) {
        case TeacherMode::kEma: return "ema";
        case TeacherMode::kFrozenBase: return "frozen_base";
        case TeacherMode::kStudentCopy: return "student_copy";
    }
    return "ema";
}

void EmaPair::validate() const {
    student.validate();
    teacher.validate();
    if (!(student.spec == teacher.spec)) {
        throw std::invalid_argument("EmaPair: student and teacher must share a NetSpec");
    }
    if (momentum < 0.0 || momentum > 1.0) {
        throw std::invalid_argument("EmaPair: momentum outside [0, 1]");
    }
}

EmaPair make_ema_pair(const VelocityField& init, double momentum, TeacherMode mode) {
    EmaPair pair{.student = init, .teacher = init, .momentum = momentum, .mode = mode};
    pair.validate();
    return pair;
}

OpsdLossResult opsd_loss(const EmaPair& pair, std::span<const TrainingPair> batch,
                         const Schedule& schedule, Rng& rng, const OpsdOptions& options) {
    if (batch.empty()) throw std::invalid_argument("opsd_loss: empty batch");
    pair.validate();
    schedule.validate();

    const int k = schedule.steps();
    const VelocityField& teacher_field =
        options.teacher_params == BranchSource::kTeacher ? pair.teacher : pair.student;

    FieldEval student_eval(pair.student);
    FieldEval rollout_eval(pair.student);
    FieldEval teacher_eval(teacher_field);

    OpsdLossResult res;
    res.grad.assign(pair.student.params.size(), 0.0);
    res.alignments.resize(batch.size());

    const double scale = 1.0 / (static_cast<double>(batch.size()) * k);
    double upstream[2];

    for (size_t b = 0; b < batch.size(); ++b) {
        const TrainingPair& tp = batch[b];
        const Condition c_s = encode_student(tp.label, pair.student.n_classes);
        const Condition c_t_full = encode_teacher(tp.label, tp.target, pair.student.n_classes);
        const Condition& c_teacher =
            options.teacher_cond == BranchSource::kTeacher ? c_t_full : c_s;

        const Vec2 noise = rng.normal2();
        // Student roll-out under its own deployment condition; states come out
        // as value snapshots (the stop-gradient boundary).
        const Trajectory traj = rollout_fn(
            [&](const Vec2& x, double t) { return rollout_eval(x, t, c_s); }, schedule, noise);

        auto& steps = res.alignments[b];
        steps.reserve(k);
        for (int i = 0; i < k; ++i) {
            const Vec2 x = traj.states[static_cast<size_t>(i)];
            const double t = schedule.at(i);
            const Vec2 u_s = student_eval(x, t, c_s);
            const Vec2 u_t = teacher_eval(x, t, c_teacher);
            const Vec2 r = u_s - u_t;
            res.loss += scale * r.squared_norm();
            upstream[0] = 2.0 * scale * r.x;
            upstream[1] = 2.0 * scale * r.y;
            student_eval.backward(upstream, res.grad);
            steps.push_back({x, t, u_s, u_t});
        }
    }
    if (!std::isfinite(res.loss)) throw NumericError("opsd_loss: non-finite loss");
    return res;
}

void ema_update(EmaPair& pair) {
    switch (pair.mode) {
        case TeacherMode::kFrozenBase:
            return;
        case TeacherMode::kStudentCopy:
            pair.teacher.params = pair.student.params;
            return;
        case TeacherMode::kEma: {
            const double m = pair.momentum;
            for (size_t i = 0; i < pair.teacher.params.size(); ++i) {
                pair.teacher.params[i] =
                    m * pair.teacher.params[i] + (1.0 - m) * pair.student.params[i];
            }
            return;
        }
    }
}

TrainLog opsd_train(EmaPair& pair, std::span<const TrainingPair> dataset,
                    const Schedule& schedule, const TuneConfig& cfg, Rng& rng,
                    const OpsdOptions& options, const EvalCallback& eval) {
    if (dataset.empty()) throw std::invalid_argument("opsd_train: empty dataset");
    pair.validate();

    TrainLog log;
    log.method = "opsd";
    log.descriptor_hash = cfg.descriptor_hash;

    AdamState adam;
    adam.reset(pair.student.params.size());
    std::vector<TrainingPair> batch(static_cast<size_t>(cfg.batch));

    for (int it = 0; it < cfg.iters; ++it) {
        TrainRow row;
        row.iter = it;
        if (eval && cfg.eval_period > 0 && it % cfg.eval_period == 0) {
            row.eval = eval(pair.student, it);
            row.has_eval = true;
        }
        for (auto& tp : batch) {
            tp = dataset[static_cast<size_t>(rng.uniform_int(static_cast<int>(dataset.size())))];
        }
        OpsdLossResult step = opsd_loss(pair, batch, schedule, rng, options);
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
        for (auto& tp : batch) {
            tp = dataset[static_cast<size_t>(rng.uniform_int(static_cast<int>(dataset.size())))];
        }
        row.loss = opsd_loss(pair, batch, schedule, rng, options).loss;
        log.rows.push_back(row);
    }
    return log;
}

}  // namespace flopsd

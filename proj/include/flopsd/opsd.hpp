#pragma once

#include <span>
#include <vector>

#include "flopsd/flow.hpp"
#include "flopsd/rng.hpp"
#include "flopsd/sampler.hpp"
#include "flopsd/trainlog.hpp"

namespace flopsd {

enum class TeacherMode { kEma, kFrozenBase, kStudentCopy };

TeacherMode teacher_mode_from_string(std::string_view s);
std::string_view to_string(TeacherMode m);

// Which weights / which condition the teacher branch evaluates with. The
// defaults give the main method; the other combinations are ablation arms.
enum class BranchSource { kTeacher, kStudent };

struct OpsdOptions {
    BranchSource teacher_cond = BranchSource::kTeacher;
    BranchSource teacher_params = BranchSource::kTeacher;
};

// Student weights, teacher weights, and the rule that moves the teacher.
struct EmaPair {
    VelocityField student;
    VelocityField teacher;
    double momentum = 0.9999;
    TeacherMode mode = TeacherMode::kEma;

    void validate() const;
};

EmaPair make_ema_pair(const VelocityField& init, double momentum, TeacherMode mode);

// Both branches evaluated at the same visited roll-out state.
struct StepAlignment {
    Vec2 state;
    double t = 0.0;
    Vec2 u_student;
    Vec2 u_teacher;
};

struct OpsdLossResult {
    double loss = 0.0;
    GradVector grad;  // student parameters only; trajectory states held constant
    std::vector<std::vector<StepAlignment>> alignments;  // [batch element][step]
};

// On-policy self-distillation loss. Per pair: encode student (label only) and
// teacher (label + target) conditions, roll out the student from fresh noise
// under its own condition, then match student and teacher velocities on every
// visited state:
//   L = mean over batch of (1/K) sum_k || u_k^s - u_k^t ||^2
// with the squared L2 norm over coordinates. Teacher velocities and roll-out
// states are constants; the gradient covers student parameters only.
OpsdLossResult opsd_loss(const EmaPair& pair, std::span<const TrainingPair> batch,
                         const Schedule& schedule, Rng& rng, const OpsdOptions& options = {});

// Moves the teacher: EMA blends toward the student, frozen_base is a no-op,
// student_copy overwrites the teacher with the student.
void ema_update(EmaPair& pair);

// Full training loop: mini-batch -> opsd_loss -> Adam on the student ->
// teacher update, with optional periodic evaluation.
TrainLog opsd_train(EmaPair& pair, std::span<const TrainingPair> dataset,
                    const Schedule& schedule, const TuneConfig& cfg, Rng& rng,
                    const OpsdOptions& options = {}, const EvalCallback& eval = nullptr);

}  // namespace flopsd

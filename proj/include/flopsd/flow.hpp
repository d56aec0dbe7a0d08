#pragma once

#include <array>
#include <span>
#include <vector>

#include "flopsd/net.hpp"
#include "flopsd/rng.hpp"
#include "flopsd/vec2.hpp"

namespace flopsd {

// Path convention: t = 0 is data, t = 1 is noise.
//   x_t = (1 - t) * x0 + t * eps
//   target velocity u* = eps - x0
//   sampling integrates dx/dt = v from t = 1 down to t = 0.
inline Vec2 interpolate(const Vec2& x0, const Vec2& eps, double t) {
    return x0 * (1.0 - t) + eps * t;
}

inline Vec2 target_velocity(const Vec2& x0, const Vec2& eps) { return eps - x0; }

// Sinusoidal time features: (sin(2 pi k t), cos(2 pi k t)) for k in {1,2,4,8}.
inline constexpr int kTimeEmbedDim = 8;
std::array<double, kTimeEmbedDim> time_embed(double t);

// Conditioning input: one-hot label embedding, a 2-D context slot carrying
// target-sample coordinates, and a flag saying whether the slot is populated.
// The student condition (flag 0) matches deployment; the teacher condition
// (flag 1) additionally sees the training target.
struct Condition {
    std::vector<double> label_embed;
    Vec2 context_slot;
    double context_flag = 0.0;

    int dim() const { return static_cast<int>(label_embed.size()) + 3; }
    void write_to(std::span<double> out) const;
};

Condition encode_student(int label, int n_classes);
Condition encode_teacher(int label, const Vec2& target, int n_classes);

struct TrainingPair {
    Vec2 target;
    int label = 0;
};

// A conditional velocity field v(x, t, c): dense net over concat(x, time
// features, condition).
struct VelocityField {
    NetSpec spec;
    ParamVector params;
    int n_classes = 0;

    static constexpr int kSampleDim = 2;
    int cond_dim() const { return n_classes + 3; }
    void validate() const;
};

VelocityField make_velocity_field(int n_classes, const std::vector<int>& hidden,
                                  Activation activation, Rng& rng);

// Zero-allocation evaluator for hot loops; holds scratch buffers for one field
// shape. Fields are immutable during evaluation, so distinct evaluators may
// run on distinct threads.
class FieldEval {
  public:
    explicit FieldEval(const VelocityField& field);

    Vec2 operator()(const Vec2& x, double t, const Condition& c);

    // Backward pass for the most recent call; accumulates the gradient of
    // <upstream, v> into param_grad.
    void backward(std::span<const double> upstream, std::span<double> param_grad);

  private:
    const VelocityField* field_;
    Workspace ws_;
    std::vector<double> input_;
};

// Convenience single-shot evaluation (allocates a workspace per call).
Vec2 velocity(const VelocityField& field, const Vec2& x, double t, const Condition& c);

enum class CondMode { kStudent, kTeacher, kDropout };

// One sampled flow-matching draw for a batch element.
struct FmDraw {
    double t = 0.0;
    Vec2 eps;
    bool use_teacher = false;
};

// Deterministic core of the flow-matching loss: given explicit draws, returns
// mean over the batch of ||v(x_t, t, c) - (eps - x0)||^2 (squared L2 over the
// two coordinates) and overwrites grad with its exact gradient.
double fm_loss_grad_given(const VelocityField& field, std::span<const TrainingPair> batch,
                          std::span<const FmDraw> draws, std::span<double> grad);

struct FmLossResult {
    double loss = 0.0;
    GradVector grad;
};

// Samples (t, eps, context coin) per element and delegates to the core. The
// coin is drawn in every mode so the three modes consume identical RNG
// streams: t, eps.x, eps.y, coin, element by element.
FmLossResult fm_loss_and_grad(const VelocityField& field, std::span<const TrainingPair> batch,
                              CondMode mode, double dropout_p, Rng& rng);

}  // namespace flopsd

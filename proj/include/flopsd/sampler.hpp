#pragma once

#include <stdexcept>
#include <vector>

#include "flopsd/errors.hpp"
#include "flopsd/flow.hpp"
#include "flopsd/vec2.hpp"

namespace flopsd {

enum class ScheduleKind { kUniform };

// Inference time grid 1 = t_K > ... > t_0 = 0, stored high to low.
struct Schedule {
    std::vector<double> timesteps;

    int steps() const { return static_cast<int>(timesteps.size()) - 1; }
    double at(int i) const { return timesteps[static_cast<size_t>(i)]; }
    void validate() const;
};

Schedule make_schedule(int k, ScheduleKind kind = ScheduleKind::kUniform);

// One explicit Euler update from t_hi down to t_lo.
inline Vec2 euler_step(const Vec2& x, double t_hi, double t_lo, const Vec2& v) {
    if (t_lo >= t_hi) throw std::invalid_argument("euler_step: times must decrease");
    return x + (t_lo - t_hi) * v;
}

// A few-step roll-out. States are plain value snapshots: gradients never flow
// across step boundaries, trainers recompute per-state passes as needed.
struct Trajectory {
    std::vector<Vec2> states;           // K+1 entries, x at t_K ... t_0
    std::vector<Vec2> step_velocities;  // K entries, velocity used to leave state k
    bool detached = true;
};

// Generic roll-out over any velocity callable vel(x, t) -> Vec2.
template <class F>
Trajectory rollout_fn(F&& vel, const Schedule& schedule, const Vec2& noise) {
    schedule.validate();
    if (!noise.finite()) throw std::invalid_argument("rollout: non-finite noise");
    const int k = schedule.steps();
    Trajectory traj;
    traj.states.reserve(k + 1);
    traj.step_velocities.reserve(k);
    Vec2 x = noise;
    traj.states.push_back(x);
    for (int i = 0; i < k; ++i) {
        const double t_hi = schedule.at(i);
        const double t_lo = schedule.at(i + 1);
        const Vec2 v = vel(x, t_hi);
        x = euler_step(x, t_hi, t_lo, v);
        if (!x.finite()) throw NumericError("rollout: non-finite state (divergent field)");
        traj.step_velocities.push_back(v);
        traj.states.push_back(x);
    }
    return traj;
}

Trajectory rollout(const VelocityField& field, const Condition& c, const Schedule& schedule,
                   const Vec2& noise);

// Dense reference solve: uniform Euler from t = 1 to t = 0.
template <class F>
Vec2 solve_dense_fn(F&& vel, const Vec2& noise, int steps = 200) {
    if (steps < 1) throw std::invalid_argument("solve_dense: steps must be positive");
    if (!noise.finite()) throw std::invalid_argument("solve_dense: non-finite noise");
    Vec2 x = noise;
    for (int i = 0; i < steps; ++i) {
        const double t_hi = static_cast<double>(steps - i) / steps;
        const double t_lo = static_cast<double>(steps - i - 1) / steps;
        x = x + (t_lo - t_hi) * vel(x, t_hi);
        if (!x.finite()) throw NumericError("solve_dense: non-finite state (divergent field)");
    }
    return x;
}

Vec2 solve_dense(const VelocityField& field, const Condition& c, const Vec2& noise,
                 int steps = 200);

// Densely integrates from t = 1 to t = 0 with `substeps` uniform Euler
// sub-steps inside every schedule segment, recording the state at each
// schedule time. Used to build on-distribution targets for distillation.
template <class F>
std::vector<Vec2> dense_schedule_states_fn(F&& vel, const Schedule& schedule, const Vec2& noise,
                                           int substeps) {
    schedule.validate();
    if (substeps < 1) throw std::invalid_argument("dense_schedule_states: substeps must be positive");
    if (!noise.finite()) throw std::invalid_argument("dense_schedule_states: non-finite noise");
    std::vector<Vec2> states;
    states.reserve(schedule.steps() + 1);
    Vec2 x = noise;
    states.push_back(x);
    for (int i = 0; i < schedule.steps(); ++i) {
        const double t_hi = schedule.at(i);
        const double t_lo = schedule.at(i + 1);
        const double h = (t_hi - t_lo) / substeps;
        for (int j = 0; j < substeps; ++j) {
            const double t = t_hi - j * h;
            x = x - h * vel(x, t);
            if (!x.finite()) {
                throw NumericError("dense_schedule_states: non-finite state (divergent field)");
            }
        }
        states.push_back(x);
    }
    return states;
}

std::vector<Vec2> dense_schedule_states(const VelocityField& field, const Condition& c,
                                        const Schedule& schedule, const Vec2& noise, int substeps);

}  // namespace flopsd

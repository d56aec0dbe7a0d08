#include "flopsd/sampler.hpp"

namespace flopsd {

void Schedule::validate() const {
    if (timesteps.size() < 2) throw std::invalid_argument("Schedule: need at least one step");
    if (timesteps.front() != 1.0 || timesteps.back() != 0.0) {
        throw std::invalid_argument("Schedule: endpoints must be exactly 1 and 0");
    }
    for (size_t i = 1; i < timesteps.size(); ++i) {
        if (timesteps[i] >= timesteps[i - 1]) {
            throw std::invalid_argument("Schedule: timesteps must strictly decrease");
        }
    }
}

Schedule make_schedule(int k, ScheduleKind kind) {
    if (k < 1) throw std::invalid_argument("make_schedule: K must be >= 1");
    (void)kind;  // only kUniform exists
    Schedule s;
    s.timesteps.resize(k + 1);
    for (int i = 0; i <= k; ++i) {
        s.timesteps[i] = static_cast<double>(k - i) / k;  // exact endpoints
    }
    s.validate();
    return s;
}

Trajectory rollout(const VelocityField& field, const Condition& c, const Schedule& schedule,
                   const Vec2& noise) {
    FieldEval eval(field);
    return rollout_fn([&](const Vec2& x, double t) { return eval(x, t, c); }, schedule, noise);
}

Vec2 solve_dense(const VelocityField& field, const Condition& c, const Vec2& noise, int steps) {
    FieldEval eval(field);
    return solve_dense_fn([&](const Vec2& x, double t) { return eval(x, t, c); }, noise, steps);
}

std::vector<Vec2> dense_schedule_states(const VelocityField& field, const Condition& c,
                                        const Schedule& schedule, const Vec2& noise,
                                        int substeps) {
    FieldEval eval(field);
    return dense_schedule_states_fn([&](const Vec2& x, double t) { return eval(x, t, c); },
                                    schedule, noise, substeps);
}

}  // namespace flopsd

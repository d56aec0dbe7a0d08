#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "flopsd/distill.hpp"
#include "flopsd/rng.hpp"

using namespace flopsd;

namespace {

VelocityField small_field(int n_classes, uint64_t seed) {
    Rng rng(seed);
    return make_velocity_field(n_classes, {12, 12}, Activation::kSilu, rng);
}

}  // namespace

TEST_SUITE("distill") {

TEST_CASE("zero iterations leave the distilled field at the base parameters") {
    const VelocityField base = small_field(2, 1);
    Rng rng(2);
    DistillConfig cfg;
    cfg.iters = 0;
    cfg.pool = 8;
    const DistillResult res = distill_few_step(base, make_schedule(4), cfg, rng);
    CHECK(res.field.params == base.params);
}

TEST_CASE("distillation never mutates the base field") {
    const VelocityField base = small_field(2, 3);
    const ParamVector before = base.params;
    Rng rng(4);
    DistillConfig cfg;
    cfg.iters = 20;
    cfg.pool = 16;
    cfg.batch = 8;
    (void)distill_few_step(base, make_schedule(4), cfg, rng);
    CHECK(base.params == before);
}

TEST_CASE("chord loss of the analytic point-mass field is zero at init") {
    // The exact point-mass field has straight-line trajectories, so the chord
    // of every segment equals the instantaneous velocity and the segment
    // regression residual vanishes.
    const Vec2 x0{0.8, -0.6};
    const auto analytic = [&](int, const Vec2& x, double t) { return (x - x0) * (1.0 / t); };
    const Schedule sched = make_schedule(8);
    Rng rng(5);
    const DistillTargets targets = make_distill_targets_fn(analytic, 1, sched, 64, 25, rng);

    double acc = 0.0;
    int terms = 0;
    for (const auto& e : targets.entries) {
        for (int i = 0; i < sched.steps(); ++i) {
            const Vec2 x = e.states[static_cast<size_t>(i)];
            const Vec2 v = analytic(e.label, x, sched.at(i));
            const Vec2 r = euler_step(x, sched.at(i), sched.at(i + 1), v) -
                           e.states[static_cast<size_t>(i) + 1];
            acc += r.squared_norm();
            ++terms;
        }
    }
    CHECK(acc / terms < 1e-12);
}

TEST_CASE("segment loss decreases over a distillation run") {
    const VelocityField base = small_field(2, 7);
    const Schedule sched = make_schedule(4);
    Rng rng(8);
    DistillConfig cfg;
    cfg.iters = 400;
    cfg.batch = 32;
    cfg.pool = 256;
    cfg.lr = 1e-3;
    const DistillResult res = distill_few_step(base, sched, cfg, rng);

    // Moving average of the training loss drops from start to finish.
    const double initial = res.log.moving_average_loss(49, 50);
    const double final = res.log.moving_average_loss(res.log.rows.size() - 1, 50);
    CHECK(final < initial);

    // The distilled field beats the base on a fresh target pool.
    Rng pool_rng(9);
    const DistillTargets fresh = make_distill_targets(base, sched, 256, 50, pool_rng);
    CHECK(segment_loss(res.field, sched, fresh) < segment_loss(base, sched, fresh));
}

TEST_CASE("distill rejects bad configs") {
    const VelocityField base = small_field(2, 10);
    Rng rng(11);
    DistillConfig cfg;
    cfg.batch = 0;
    CHECK_THROWS_AS(distill_few_step(base, make_schedule(4), cfg, rng), std::invalid_argument);
}

}  // TEST_SUITE

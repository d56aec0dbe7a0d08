#include "flopsd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flopsd {

double sliced_wasserstein(const SampleSet& a, const SampleSet& b, int n_proj, int p,
                          uint64_t seed) {
    if (a.points.empty() || b.points.empty()) {
        throw std::invalid_argument("sliced_wasserstein: empty sample set");
    }
    if (a.points.size() != b.points.size()) {
        throw std::invalid_argument("sliced_wasserstein: sets must have equal size");
    }
    if (n_proj < 1) throw std::invalid_argument("sliced_wasserstein: n_proj must be >= 1");
    if (p != 1 && p != 2) throw std::invalid_argument("sliced_wasserstein: p must be 1 or 2");

    const size_t n = a.points.size();
    Rng rng(seed);
    std::vector<double> pa(n), pb(n);
    double total = 0.0;
    for (int j = 0; j < n_proj; ++j) {
        const double theta = rng.uniform(0.0, 2.0 * Rng::kPi);
        const Vec2 dir{std::cos(theta), std::sin(theta)};
        for (size_t i = 0; i < n; ++i) pa[i] = a.points[i].dot(dir);
        for (size_t i = 0; i < n; ++i) pb[i] = b.points[i].dot(dir);
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double d = std::abs(pa[i] - pb[i]);
            acc += (p == 1) ? d : d * d;
        }
        acc /= static_cast<double>(n);
        total += (p == 1) ? acc : std::sqrt(acc);
    }
    return total / n_proj;
}

double energy_distance(const SampleSet& a, const SampleSet& b) {
    if (a.points.empty() || b.points.empty()) {
        throw std::invalid_argument("energy_distance: empty sample set");
    }
    const auto mean_cross = [](const std::vector<Vec2>& u, const std::vector<Vec2>& v) {
        double acc = 0.0;
        for (const Vec2& x : u) {
            for (const Vec2& y : v) acc += distance(x, y);
        }
        return acc / (static_cast<double>(u.size()) * static_cast<double>(v.size()));
    };
    return 2.0 * mean_cross(a.points, b.points) - mean_cross(a.points, a.points) -
           mean_cross(b.points, b.points);
}

SampleSet sample_kstep(const VelocityField& field, const Schedule& schedule, int label, int n,
                       Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_kstep: n must be positive");
    const Condition c = encode_student(label, field.n_classes);
    FieldEval eval(field);
    SampleSet out;
    out.label = label;
    out.provenance = Provenance::kKstepSolve;
    out.points.reserve(n);
    for (int i = 0; i < n; ++i) {
        const Vec2 noise = rng.normal2();
        const Trajectory traj = rollout_fn(
            [&](const Vec2& x, double t) { return eval(x, t, c); }, schedule, noise);
        out.points.push_back(traj.states.back());
    }
    return out;
}

SampleSet sample_dense(const VelocityField& field, int label, int n, int steps, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_dense: n must be positive");
    const Condition c = encode_student(label, field.n_classes);
    FieldEval eval(field);
    SampleSet out;
    out.label = label;
    out.provenance = Provenance::kDenseSolve;
    out.points.reserve(n);
    for (int i = 0; i < n; ++i) {
        const Vec2 noise = rng.normal2();
        out.points.push_back(solve_dense_fn(
            [&](const Vec2& x, double t) { return eval(x, t, c); }, noise, steps));
    }
    return out;
}

QualityResult quality_proxy_cached(const VelocityField& field, const Schedule& schedule,
                                   std::span<const SampleSet> reference_sets,
                                   std::span<const int> labels, int n, Rng& rng) {
    if (labels.empty()) throw std::invalid_argument("quality_proxy: no labels");
    if (reference_sets.size() != labels.size()) {
        throw std::invalid_argument("quality_proxy: reference/label count mismatch");
    }
    QualityResult res;
    res.labels.assign(labels.begin(), labels.end());
    res.per_label.reserve(labels.size());
    double acc = 0.0;
    for (size_t i = 0; i < labels.size(); ++i) {
        const SampleSet gen = sample_kstep(field, schedule, labels[i], n, rng);
        const double d = energy_distance(gen, reference_sets[i]);
        res.per_label.push_back(d);
        acc += d;
    }
    res.aggregate = acc / static_cast<double>(labels.size());
    return res;
}

QualityResult quality_proxy(const VelocityField& field, const Schedule& schedule,
                            const VelocityField& reference, std::span<const int> labels, int n,
                            int dense_steps, Rng& rng) {
    std::vector<SampleSet> refs;
    refs.reserve(labels.size());
    for (int label : labels) refs.push_back(sample_dense(reference, label, n, dense_steps, rng));
    return quality_proxy_cached(field, schedule, refs, labels, n, rng);
}

double concept_score(const VelocityField& field, const Schedule& schedule,
                     const SampleSet& target, int label, int n, Rng& rng) {
    if (target.points.empty()) throw std::invalid_argument("concept_score: empty target set");
    const SampleSet gen = sample_kstep(field, schedule, label, n, rng);
    return energy_distance(gen, target);
}

}  // namespace flopsd

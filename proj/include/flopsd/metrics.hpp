#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flopsd/flow.hpp"
#include "flopsd/rng.hpp"
#include "flopsd/sampler.hpp"
#include "flopsd/vec2.hpp"

namespace flopsd {

enum class Provenance { kData, kDenseSolve, kKstepSolve };

struct SampleSet {
    std::vector<Vec2> points;
    std::optional<int> label;
    Provenance provenance = Provenance::kData;
};

// Average over n_proj seeded random unit directions of the 1-D p-Wasserstein
// distance between the projected, sorted samples. Requires equal sizes and
// p in {1, 2}.
double sliced_wasserstein(const SampleSet& a, const SampleSet& b, int n_proj, int p,
                          uint64_t seed);

// Energy distance 2 E||a-b|| - E||a-a'|| - E||b-b'|| over all ordered pairs
// (V-statistic), accumulated in fixed row-major order.
double energy_distance(const SampleSet& a, const SampleSet& b);

// n few-step samples from the field under the student condition for `label`.
SampleSet sample_kstep(const VelocityField& field, const Schedule& schedule, int label, int n,
                       Rng& rng);

// n dense-solve samples (the many-step reference sampler).
SampleSet sample_dense(const VelocityField& field, int label, int n, int steps, Rng& rng);

struct QualityResult {
    std::vector<int> labels;
    std::vector<double> per_label;
    double aggregate = 0.0;
};

// Few-step quality proxy: per retained label, energy distance between the
// field's K-step samples and reference samples; aggregate is the mean over
// labels. Lower = better-preserved few-step quality.
QualityResult quality_proxy_cached(const VelocityField& field, const Schedule& schedule,
                                   std::span<const SampleSet> reference_sets,
                                   std::span<const int> labels, int n, Rng& rng);

// Spec-shaped variant: draws the reference sets itself (dense solves of the
// reference field, label by label), then the field's K-step samples.
QualityResult quality_proxy(const VelocityField& field, const Schedule& schedule,
                            const VelocityField& reference, std::span<const int> labels, int n,
                            int dense_steps, Rng& rng);

// Concept adoption: energy distance between the field's K-step samples for
// `label` and the concept-shift target distribution samples. Lower = learned.
double concept_score(const VelocityField& field, const Schedule& schedule,
                     const SampleSet& target, int label, int n, Rng& rng);

}  // namespace flopsd

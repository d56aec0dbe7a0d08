#pragma once

#include <optional>
#include <vector>

#include "flopsd/flow.hpp"
#include "flopsd/rng.hpp"
#include "flopsd/vec2.hpp"

namespace flopsd {

// Relocates one class to a new center; the tune set is drawn there. The
// default of 4 pairs mirrors learning a concept from a handful of examples.
struct ConceptShift {
    int label = 0;
    Vec2 new_center;
    int n_tune_pairs = 4;
};

struct DatasetSpec {
    int n_classes = 0;
    std::vector<Vec2> mode_centers;  // one per class
    double mode_std = 0.0;
    int samples_per_class = 0;
    std::optional<ConceptShift> concept_shift;

    void validate() const;  // centers pairwise >= 6 * mode_std, counts positive
};

struct Dataset {
    std::vector<TrainingPair> pretrain;
    std::vector<TrainingPair> tune;
};

// Gaussian blobs at the mode centers; the tune set (when a concept shift is
// configured) comes from the shifted center under the shifted label.
Dataset generate_dataset(const DatasetSpec& spec, Rng& rng);

// Global style transform for the domain-shift scenario: rotate about the
// origin and scale.
Vec2 style_transform(const Vec2& p, double angle_deg, double scale);

}  // namespace flopsd

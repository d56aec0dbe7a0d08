#include "flopsd/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flopsd {

void DatasetSpec::validate() const {
    if (n_classes < 1) throw std::invalid_argument("DatasetSpec: n_classes must be >= 1");
    if (static_cast<int>(mode_centers.size()) != n_classes) {
        throw std::invalid_argument("DatasetSpec: need one center per class");
    }
    if (mode_std < 0.0) throw std::invalid_argument("DatasetSpec: mode_std must be >= 0");
    if (samples_per_class < 1) {
        throw std::invalid_argument("DatasetSpec: samples_per_class must be >= 1");
    }
    for (size_t i = 0; i < mode_centers.size(); ++i) {
        if (!mode_centers[i].finite()) throw std::invalid_argument("DatasetSpec: non-finite center");
        for (size_t j = i + 1; j < mode_centers.size(); ++j) {
            if (distance(mode_centers[i], mode_centers[j]) < 6.0 * mode_std) {
                throw std::invalid_argument(
                    "DatasetSpec: centers closer than 6 * mode_std (modes must be well separated)");
            }
        }
    }
    if (concept_shift) {
        if (concept_shift->label < 0 || concept_shift->label >= n_classes) {
            throw std::invalid_argument("DatasetSpec: shift label out of range");
        }
        if (!concept_shift->new_center.finite()) {
            throw std::invalid_argument("DatasetSpec: non-finite shift center");
        }
        if (concept_shift->n_tune_pairs < 1) {
            throw std::invalid_argument("DatasetSpec: n_tune_pairs must be >= 1");
        }
    }
}

Dataset generate_dataset(const DatasetSpec& spec, Rng& rng) {
    spec.validate();
    Dataset data;
    data.pretrain.reserve(static_cast<size_t>(spec.n_classes) * spec.samples_per_class);
    for (int y = 0; y < spec.n_classes; ++y) {
        for (int i = 0; i < spec.samples_per_class; ++i) {
            const Vec2 p = spec.mode_centers[static_cast<size_t>(y)] + spec.mode_std * rng.normal2();
            data.pretrain.push_back({p, y});
        }
    }
    if (spec.concept_shift) {
        const ConceptShift& cs = *spec.concept_shift;
        data.tune.reserve(static_cast<size_t>(cs.n_tune_pairs));
        for (int i = 0; i < cs.n_tune_pairs; ++i) {
            const Vec2 p = cs.new_center + spec.mode_std * rng.normal2();
            data.tune.push_back({p, cs.label});
        }
    }
    return data;
}

Vec2 style_transform(const Vec2& p, double angle_deg, double scale) {
    const double a = angle_deg * Rng::kPi / 180.0;
    const double c = std::cos(a);
    const double s = std::sin(a);
    return {scale * (c * p.x - s * p.y), scale * (s * p.x + c * p.y)};
}

}  // namespace flopsd

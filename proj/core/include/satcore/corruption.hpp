#pragma once

#include <cstdint>
#include <string>

#include "satcore/dataset.hpp"

namespace sat {

enum class CorruptionScheme {
    None,
    CorruptedLabels,  // labels redrawn uniformly over all classes
    Gaussian,         // inputs replaced by Gaussian noise matching global stats
    RandomPixels,     // per-sample independent pixel permutation
    ShuffledPixels,   // one fixed pixel permutation for every selected sample
};

CorruptionScheme parse_corruption_scheme(const std::string& name);
std::string to_string(CorruptionScheme scheme);

struct CorruptionSpec {
    CorruptionScheme scheme = CorruptionScheme::None;
    double rate = 0.0;  // per-sample selection probability p
    std::uint64_t seed = 0;

    void validate() const;
};

/// Applies the corruption scheme. Each sample is selected independently with
/// probability `rate`; selected samples are transformed, the rest are left
/// bitwise untouched. Clean labels and (for input schemes) original inputs
/// are retained as evaluation metadata. Rejects an already-corrupted dataset.
LabeledDataset corrupt(const LabeledDataset& ds, const CorruptionSpec& spec);

/// Fraction of samples not selected for corruption (mask-based).
double clean_fraction_mask(const LabeledDataset& ds);
/// Fraction of samples whose noisy label agrees with the clean label.
double clean_fraction_label(const LabeledDataset& ds);

}  // namespace sat

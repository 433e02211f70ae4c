#include "satcore/corruption.hpp"

#include <cmath>
#include <stdexcept>

#include "satcore/rng.hpp"

namespace sat {

CorruptionScheme parse_corruption_scheme(const std::string& name) {
    if (name == "none") return CorruptionScheme::None;
    if (name == "corrupted_labels") return CorruptionScheme::CorruptedLabels;
    if (name == "gaussian") return CorruptionScheme::Gaussian;
    if (name == "random_pixels") return CorruptionScheme::RandomPixels;
    if (name == "shuffled_pixels") return CorruptionScheme::ShuffledPixels;
    throw std::invalid_argument("unknown corruption scheme: " + name);
}

std::string to_string(CorruptionScheme scheme) {
    switch (scheme) {
        case CorruptionScheme::None: return "none";
        case CorruptionScheme::CorruptedLabels: return "corrupted_labels";
        case CorruptionScheme::Gaussian: return "gaussian";
        case CorruptionScheme::RandomPixels: return "random_pixels";
        case CorruptionScheme::ShuffledPixels: return "shuffled_pixels";
    }
    throw std::invalid_argument("unknown corruption scheme");
}

void CorruptionSpec::validate() const {
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("corruption: rate must be in [0, 1]");
}

LabeledDataset corrupt(const LabeledDataset& ds, const CorruptionSpec& spec) {
    spec.validate();
    if (ds.any_corrupted())
        throw std::invalid_argument("corrupt: dataset already carries corrupted samples");

    LabeledDataset out = ds;
    if (spec.scheme == CorruptionScheme::None) return out;

    const std::size_t n = ds.size(), d = ds.dim(), c = ds.class_count;
    Rng rng(spec.seed);

    // Selection first, so the downstream transform stream is independent of p.
    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < n; ++i)
        if (rng.bernoulli(spec.rate)) {
            out.corrupted_mask[i] = 1;
            selected.push_back(i);
        }
    if (selected.empty()) return out;

    switch (spec.scheme) {
        case CorruptionScheme::CorruptedLabels: {
            // Uniform over all c classes: a selected sample keeps its label
            // with probability 1/c.
            for (std::size_t i : selected) {
                const auto new_label =
                    static_cast<std::uint32_t>(rng.uniform_index(c));
                auto row = out.noisy_labels.row(i);
                for (double& v : row) v = 0.0;
                row[new_label] = 1.0;
            }
            break;
        }
        case CorruptionScheme::Gaussian: {
            // Global scalar statistics over every value of the original inputs.
            double mean = 0.0;
            for (double v : ds.inputs.data()) mean += v;
            mean /= static_cast<double>(n * d);
            double var = 0.0;
            for (double v : ds.inputs.data()) var += (v - mean) * (v - mean);
            var /= static_cast<double>(n * d);
            const double stddev = std::sqrt(var);
            out.clean_inputs = ds.inputs;
            for (std::size_t i : selected) {
                auto row = out.inputs.row(i);
                for (double& v : row) v = rng.normal(mean, stddev);
            }
            break;
        }
        case CorruptionScheme::RandomPixels: {
            out.clean_inputs = ds.inputs;
            for (std::size_t i : selected) {
                const std::vector<std::size_t> perm = rng.permutation(d);
                auto src = ds.inputs.row(i);
                auto dst = out.inputs.row(i);
                for (std::size_t j = 0; j < d; ++j) dst[j] = src[perm[j]];
            }
            break;
        }
        case CorruptionScheme::ShuffledPixels: {
            out.clean_inputs = ds.inputs;
            const std::vector<std::size_t> perm = rng.permutation(d);
            for (std::size_t i : selected) {
                auto src = ds.inputs.row(i);
                auto dst = out.inputs.row(i);
                for (std::size_t j = 0; j < d; ++j) dst[j] = src[perm[j]];
            }
            break;
        }
        case CorruptionScheme::None: break;
    }
    return out;
}

double clean_fraction_mask(const LabeledDataset& ds) {
    if (ds.size() == 0) return 1.0;
    std::size_t clean = 0;
    for (std::uint8_t m : ds.corrupted_mask)
        if (!m) ++clean;
    return static_cast<double>(clean) / static_cast<double>(ds.size());
}

double clean_fraction_label(const LabeledDataset& ds) {
    if (ds.size() == 0) return 1.0;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.noisy_label_index(i) == ds.clean_labels[i]) ++agree;
    return static_cast<double>(agree) / static_cast<double>(ds.size());
}

}  // namespace sat

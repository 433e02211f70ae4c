#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "satcore/tensor.hpp"

namespace sat {

/// Indexed samples: inputs, noisy one-hot training labels, hidden clean labels
/// and a per-sample corruption flag. Clean metadata is evaluation-only; the
/// training path never reads it.
struct LabeledDataset {
    Tensor inputs;                      // n x d, the (possibly corrupted) training view
    Tensor noisy_labels;                // n x c one-hot
    std::vector<std::uint32_t> clean_labels;  // class indices
    std::vector<std::uint8_t> corrupted_mask;
    std::size_t class_count = 0;
    // Original inputs, present only when an input-corrupting scheme ran.
    std::optional<Tensor> clean_inputs;

    std::size_t size() const { return clean_labels.size(); }
    std::size_t dim() const { return inputs.empty() ? 0 : inputs.cols(); }

    /// Evaluation view of the uncorrupted inputs.
    const Tensor& clean_input_view() const { return clean_inputs ? *clean_inputs : inputs; }

    std::uint32_t noisy_label_index(std::size_t i) const;
    bool any_corrupted() const;
    void validate() const;
};

LabeledDataset make_dataset(Tensor inputs, std::vector<std::uint32_t> labels,
                            std::size_t class_count);

/// Head/tail split in original order, no shuffling.
std::pair<LabeledDataset, LabeledDataset> split_train_val(const LabeledDataset& ds,
                                                          std::size_t train_count);

enum class SyntheticGenerator { GaussianBlobs, Spirals };

struct SyntheticSpec {
    SyntheticGenerator generator = SyntheticGenerator::GaussianBlobs;
    std::size_t classes = 2;
    std::size_t per_class = 100;
    std::size_t dim = 2;
    double separation = 4.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Deterministic synthetic dataset. gaussian_blobs places unit-norm class
/// means on the coordinate simplex (d >= c) or a circle, with isotropic
/// Gaussian noise of standard deviation 1/separation. Samples are interleaved
/// by class so head/tail splits stay balanced.
LabeledDataset gen_synthetic(const SyntheticSpec& spec);

/// CIFAR-10 binary batch: records of 3073 bytes (1 label + 3072 pixels).
/// Pixels scaled to [0, 1].
LabeledDataset load_cifar_binary(const std::string& path);

/// IDX (MNIST-style) container pair: big-endian magic + dims header.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Versioned dataset snapshot, magic "SATD". Round-trips inputs bit-exactly.
void save_dataset(const LabeledDataset& ds, const std::string& path);
LabeledDataset load_dataset(const std::string& path);

}  // namespace sat

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "satcore/dataset.hpp"
#include "satcore/metrics.hpp"
#include "satcore/mlp.hpp"
#include "satcore/optim.hpp"
#include "satcore/tensor.hpp"

namespace sat {

/// Probability floor for every log term.
inline constexpr double kProbFloor = 1e-12;
/// Floor for the reversed cross-entropy term (the targets can be exactly one-hot).
inline constexpr double kReverseFloor = 1e-4;

struct SatConfig {
    std::size_t start_epoch = 60;  // E_s: targets frozen while epoch <= E_s
    double alpha = 0.9;            // EMA momentum on the targets

    void validate() const;
};

/// Per-sample soft targets t_i on the probability simplex. Rows start as the
/// one-hot noisy labels and drift toward accumulated model predictions.
struct TargetStore {
    Tensor targets;  // n x c
    std::size_t last_updated_epoch = 0;

    std::size_t size() const { return targets.rows(); }
    std::size_t classes() const { return targets.cols(); }
    double weight(std::size_t i) const;  // max_j t_ij, in [1/c, 1]

    /// Throws if any row leaves the simplex by more than tol.
    void check_simplex(double tol = 1e-9) const;
};

TargetStore init_targets(const LabeledDataset& ds);

/// alpha * t + (1 - alpha) * p. Rejects inputs off the simplex beyond 1e-6.
std::vector<double> ema_update(std::span<const double> t, std::span<const double> p,
                               double alpha);
/// In-place variant used by the training loop; same validation.
void ema_update_inplace(std::span<double> t, std::span<const double> p, double alpha);

/// Labeling confidence of a target row: max_j t_j.
double sample_weight(std::span<const double> t);

struct LossValueGrad {
    double value = 0.0;
    Tensor dlogits;  // d(loss)/d(logits), same shape as probs
};

/// Confidence-weighted soft-target cross entropy:
///   -(1 / sum_i w_i) * sum_i w_i * sum_j t_ij log p_ij
double sat_loss(const Tensor& probs, const Tensor& targets,
                std::span<const double> weights);
LossValueGrad sat_loss_grad(const Tensor& probs, const Tensor& targets,
                            std::span<const double> weights);

/// Mean cross entropy against one-hot labels.
double erm_loss(const Tensor& probs, const Tensor& one_hot_labels);
LossValueGrad erm_loss_grad(const Tensor& probs, const Tensor& one_hot_labels);

/// Symmetric variant: per-sample w1 * CE(t, p) + w2 * CE(p, t), combined with
/// the same weight normalization. The reversed term clamps log t at log(1e-4).
double sce_sat_loss(const Tensor& probs, const Tensor& targets,
                    std::span<const double> weights, double w1 = 1.0, double w2 = 0.1);
LossValueGrad sce_sat_loss_grad(const Tensor& probs, const Tensor& targets,
                                std::span<const double> weights, double w1 = 1.0,
                                double w2 = 0.1);

enum class SatTrainMode { Erm, Sat, SatSce };

struct TrainConfig {
    SatTrainMode mode = SatTrainMode::Sat;
    SatConfig sat;
    SgdHyper optim;
    std::size_t epochs = 200;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
    /// Assert simplex/weight invariants on the store after every epoch.
    bool check_invariants = true;
    /// Resume support: start from a checkpointed store instead of the one-hot
    /// labels. Must match the dataset's sample and class counts.
    std::optional<TargetStore> initial_store;
    /// Observes the model after each epoch's updates. Must not mutate it.
    std::function<void(std::size_t epoch, const MlpModel&)> epoch_callback;
};

struct TrainResult {
    MlpModel model;
    TargetStore store;
    std::vector<EpochRecord> log;
};

/// Algorithm: per epoch, shuffle; per mini-batch compute p_i, update the
/// stored targets once epoch > E_s, recompute weights, and take one SGD step
/// on the mode's loss under a cosine learning-rate schedule. ERM runs through
/// the identical code path with targets permanently frozen.
TrainResult train(const LabeledDataset& train_ds, const LabeledDataset& val_ds,
                  const MlpSpec& mlp, const TrainConfig& cfg);

/// Versioned target checkpoint, magic "SATT".
void save_targets(const TargetStore& store, const std::string& path);
TargetStore load_targets(const std::string& path);

/// Classification accuracy, argmax ties to the lowest index. When
/// restrict_classes > 0 the argmax runs over the first restrict_classes
/// outputs only (used by the abstention head).
double evaluate_accuracy(const MlpModel& model, const Tensor& inputs,
                         const std::vector<std::uint32_t>& labels,
                         std::size_t restrict_classes = 0);

}  // namespace sat

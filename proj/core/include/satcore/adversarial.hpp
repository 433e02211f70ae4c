#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "satcore/sat.hpp"

namespace sat {

struct AttackSpec {
    double epsilon = 0.031;   // l-inf radius
    double step_size = 0.007;
    std::size_t steps = 20;
    double bound_lo = 0.0;    // pixel bounds
    double bound_hi = 1.0;

    void validate() const;
};

struct TradesConfig {
    double inv_lambda = 6.0;  // weight on the KL robustness term
    AttackSpec attack{0.031, 0.007, 10, 0.0, 1.0};  // inner maximization (training)

    void validate() const;
};

enum class AttackObjective {
    CeWrtLabel,      // cross entropy against the given labels
    KlWrtReference,  // KL(p(x0) || p(x~)), reference fixed at the clean input
};

/// Random-start projected-gradient attack with best-iterate tracking. The
/// unperturbed start is always a candidate, so the returned objective never
/// falls below the clean one. Under the CE objective, candidates that flip
/// the prediction dominate those that only raise the loss, which makes
/// robust accuracy <= clean accuracy hold exactly.
/// Per-sample noise streams derive from (seed, sample index); pass
/// sample_indices to pin global indices (defaults to 0..m-1).
Tensor pgd_attack(const MlpModel& model, const Tensor& x0,
                  const std::vector<std::uint32_t>& labels, const AttackSpec& spec,
                  AttackObjective objective, std::uint64_t seed = 0,
                  const std::vector<std::size_t>* sample_indices = nullptr);

/// Mean row-wise KL(p_i || q_i) with the library-wide probability floor.
double kl_divergence_mean(const Tensor& p, const Tensor& q);

/// Mean KL plus its gradients w.r.t. both sets of logits (p and q both come
/// from softmax). Used by the robust training objective.
struct KlMeanGrad {
    double mean = 0.0;
    Tensor dp_logits;
    Tensor dq_logits;
};
KlMeanGrad kl_divergence_mean_grad(const Tensor& p, const Tensor& q);

/// sat_loss(p(x), t, w) + inv_lambda * mean_i KL(p(x_i) || p(x~_i)), with the
/// adversarial points held fixed (no gradient through the inner maximization).
double trades_sat_loss(const MlpModel& model, const Tensor& x, const Tensor& x_adv,
                       const Tensor& targets, std::span<const double> weights,
                       const TradesConfig& cfg);

/// Accuracy under a CE-objective PGD attack on every evaluation sample.
double robust_accuracy(const MlpModel& model, const LabeledDataset& eval_ds,
                       const AttackSpec& spec, std::uint64_t seed = 0);

enum class AdvTrainMode { Trades, TradesSat };

struct AdvTrainConfig {
    AdvTrainMode mode = AdvTrainMode::TradesSat;
    SatConfig sat{70, 0.9};  // E_s = 70, alpha = 0.9 for adversarial training
    SgdHyper optim;
    TradesConfig trades;
    std::size_t epochs = 100;
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;
    /// Robust accuracy on the validation set every this many epochs (0 = never).
    std::size_t robust_eval_every = 1;
    AttackSpec eval_attack{0.031, 0.007, 20, 0.0, 1.0};
    bool check_invariants = true;
    std::function<void(std::size_t epoch, const MlpModel&)> epoch_callback;
};

/// TRADES training with the natural term replaced by the confidence-weighted
/// soft-target loss (plain cross entropy in Trades mode).
TrainResult train_adversarial(const LabeledDataset& train_ds,
                              const LabeledDataset& val_ds, const MlpSpec& mlp,
                              const AdvTrainConfig& cfg);

/// CSV rows {epoch, clean_acc, robust_acc} for the epochs that evaluated
/// robustness.
void emit_robustness_csv(const std::vector<EpochRecord>& log, std::ostream& out);
void emit_robustness_csv(const std::vector<EpochRecord>& log, const std::string& path);

}  // namespace sat

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "satcore/sat.hpp"

namespace sat {

/// Classifier with an extra abstention output: real classes 0..c-1, slot c
/// abstains.
struct SelectiveModel {
    MlpModel net;                    // output dimension = class_count + 1
    std::size_t class_count = 0;     // abstain_index == class_count

    std::size_t abstain_index() const { return class_count; }
};

/// Abstention-guided loss over (c+1)-way probabilities:
///   -(1/m) sum_i [ a_i log p_{i,y_i} + (1 - a_i) log p_{i,c} ]
/// with a_i = t_{i,y_i}, the target mass on the labeled class.
double selective_loss(const Tensor& probs, std::span<const double> target_on_label,
                      const std::vector<std::uint32_t>& label_indices);
LossValueGrad selective_loss_grad(const Tensor& probs,
                                  std::span<const double> target_on_label,
                                  const std::vector<std::uint32_t>& label_indices);

struct SelectivePrediction {
    bool abstained = false;
    std::size_t predicted_class = 0;  // meaningful only when !abstained
    double abstain_score = 0.0;       // g(x), softmax mass on the abstain slot
};

/// Abstains iff g(x) > tau (strict), otherwise argmax over the real classes.
SelectivePrediction selective_predict(const SelectiveModel& model, const Tensor& x_row,
                                      double tau);

/// Abstain scores g(x) for every row of the input.
std::vector<double> abstain_scores(const SelectiveModel& model, const Tensor& inputs);

struct CalibratedThreshold {
    double tau = 0.0;
    double achieved_coverage = 0.0;
};

/// Smallest empirical quantile of the scores whose coverage (fraction with
/// g <= tau) reaches the target.
CalibratedThreshold calibrate_threshold(const std::vector<double>& scores,
                                        double target_coverage);

struct CoveragePoint {
    double coverage_target = 0.0;
    double coverage_achieved = 0.0;
    double tau = 0.0;
    double selective_error = 0.0;  // misclassification rate among covered samples
    bool defined = true;           // false when no sample is covered
};

/// Calibrates tau per requested coverage and measures the selective error
/// against the clean labels of the evaluation set.
std::vector<CoveragePoint> risk_coverage(const SelectiveModel& model,
                                         const LabeledDataset& eval_ds,
                                         const std::vector<double>& coverages);

/// CSV columns: coverage_target,coverage_achieved,tau,selective_error_pct
void emit_risk_coverage_csv(const std::vector<CoveragePoint>& points, std::ostream& out);
void emit_risk_coverage_csv(const std::vector<CoveragePoint>& points,
                            const std::string& path);

struct SelectiveTrainConfig {
    SatConfig sat{0, 0.99};  // E_s = 0, alpha = 0.99 for the abstention task
    SgdHyper optim;
    std::size_t epochs = 300;
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;
    bool check_invariants = true;
    std::function<void(std::size_t epoch, const MlpModel&)> epoch_callback;
};

struct SelectiveTrainResult {
    SelectiveModel model;
    TargetStore store;  // targets over the c real classes
    std::vector<EpochRecord> log;
};

/// Trains the (c+1)-way head on the abstention loss. Targets follow the same
/// EMA machinery over the real classes, with predictions renormalized over
/// those classes first. Logged accuracies use the real-class argmax.
SelectiveTrainResult train_selective(const LabeledDataset& train_ds,
                                     const LabeledDataset& val_ds, const MlpSpec& mlp,
                                     const SelectiveTrainConfig& cfg);

}  // namespace sat

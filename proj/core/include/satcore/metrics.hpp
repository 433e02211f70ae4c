#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "satcore/tensor.hpp"

namespace sat {

/// One row of the per-epoch training log.
struct EpochRecord {
    std::size_t epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
    double acc_noisy_train = 0.0;
    double acc_clean_train = 0.0;
    double acc_noisy_val = 0.0;
    double acc_clean_val = 0.0;
    std::optional<double> robust_acc;

    bool operator==(const EpochRecord&) const = default;
};

/// Lossless CSV round-trip (doubles printed with 17 significant digits).
/// The robust_acc column is emitted only when some record carries it.
void emit_epoch_csv(const std::vector<EpochRecord>& records, std::ostream& out);
void emit_epoch_csv(const std::vector<EpochRecord>& records, const std::string& path);
std::vector<EpochRecord> parse_epoch_csv(std::istream& in);
std::vector<EpochRecord> parse_epoch_csv_file(const std::string& path);

/// Agreement rate between argmax of stored targets and hidden clean labels.
/// Argmax ties break toward the lowest class index.
double recovered_accuracy(const Tensor& targets, const std::vector<std::uint32_t>& clean_labels);

/// Confusion of clean vs. recovered labels plus mean sample weight per cell.
struct RecoveryReport {
    double recovered_acc = 0.0;
    std::vector<std::vector<std::size_t>> confusion;  // [clean][recovered]
    std::vector<std::vector<double>> weight_matrix;   // mean max-target per cell
    std::vector<std::vector<bool>> present;           // false where the cell is empty
};

RecoveryReport recovery_report(const Tensor& targets,
                               const std::vector<std::uint32_t>& clean_labels);

/// Gap between training and validation accuracy on the corrupted distribution.
double generalization_error(const EpochRecord& record);

/// Capacity-scaled SAT hyperparameters: r = base_width / width,
/// start_epoch = round(40 r), alpha = 0.9^(1/r).
struct CapacityParams {
    std::size_t start_epoch;
    double alpha;
};
CapacityParams capacity_sweep_params(std::size_t width, std::size_t base_width = 64);

enum class EarlyStopCriterion { NoisyValAccuracy, CleanValAccuracy };

struct EarlyStopResult {
    std::size_t epoch = 0;            // epoch field of the selected record
    double criterion_value = 0.0;     // validation accuracy that won
    double clean_val_accuracy = 0.0;  // clean-test accuracy at that epoch
};

/// Epoch with the best validation accuracy (ties -> earliest).
EarlyStopResult early_stop_select(const std::vector<EpochRecord>& records,
                                  EarlyStopCriterion criterion =
                                      EarlyStopCriterion::NoisyValAccuracy);

}  // namespace sat

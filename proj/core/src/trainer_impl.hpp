#pragma once

// Internal training engine shared by the sat, selective and adversarial
// entry points. Not installed.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "satcore/adversarial.hpp"
#include "satcore/dataset.hpp"
#include "satcore/mlp.hpp"
#include "satcore/sat.hpp"

namespace sat::detail {

enum class EngineMode { Erm, Sat, SatSce, Selective, Trades, TradesSat };

struct EngineConfig {
    EngineMode mode = EngineMode::Sat;
    SatConfig sat;
    SgdHyper optim;
    std::size_t epochs = 1;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
    // Trades modes only.
    TradesConfig trades;
    std::size_t robust_eval_every = 0;
    AttackSpec eval_attack;
    bool check_invariants = true;
    std::optional<TargetStore> initial_store;
    std::function<void(std::size_t, const MlpModel&)> epoch_callback;
};

TrainResult run_training(const LabeledDataset& train_ds, const LabeledDataset& val_ds,
                         const MlpSpec& mlp, const EngineConfig& cfg);

/// Accuracy of one forward pass against two label sets at once.
std::pair<double, double> accuracy_pair(const MlpModel& model, const Tensor& inputs,
                                        const std::vector<std::uint32_t>& labels_a,
                                        const std::vector<std::uint32_t>& labels_b,
                                        std::size_t restrict_classes);

}  // namespace sat::detail

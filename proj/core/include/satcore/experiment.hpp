#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "satcore/adversarial.hpp"
#include "satcore/corruption.hpp"
#include "satcore/dataset.hpp"
#include "satcore/metrics.hpp"
#include "satcore/sat.hpp"

namespace sat {

enum class RunMode { Erm, Sat, SatSce, Selective, Trades, TradesSat };

RunMode parse_run_mode(const std::string& name);
std::string to_string(RunMode mode);

/// Resolved experiment description. Parsed from flat key=value text with
/// section prefixes (e.g. corruption.rate=0.4); every field has a CLI flag
/// mirror.
struct ExperimentConfig {
    enum class Source { Synthetic, Cifar, Idx, Snapshot };

    // dataset
    Source source = Source::Synthetic;
    std::string dataset_path;  // cifar batch or snapshot file
    std::string images_path;   // idx pair
    std::string labels_path;
    SyntheticSpec synthetic{SyntheticGenerator::GaussianBlobs, 10, 1200, 32, 4.0, 1};
    std::size_t train_count = 10000;

    CorruptionSpec corruption;

    // model
    std::vector<std::size_t> hidden = {256, 256};

    // optimizer
    SgdHyper optim;

    // sat hyperparameters; unset fields take the mode's defaults
    std::optional<std::size_t> sat_start_epoch;
    std::optional<double> sat_alpha;

    // adversarial
    TradesConfig trades;
    AttackSpec eval_attack{0.031, 0.007, 20, 0.0, 1.0};
    std::size_t robust_eval_every = 1;

    // run
    RunMode mode = RunMode::Sat;
    std::size_t epochs = 120;
    std::size_t batch_size = 256;
    std::uint64_t seed = 1;
    std::size_t trials = 1;
    std::vector<double> coverages = {1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7};
    bool augment = false;  // reserved; enabling it is rejected as unimplemented
    std::string output_dir = "run";

    /// E_s / alpha after applying per-mode defaults.
    SatConfig sat_config() const;
    void validate() const;
};

/// Parse one key=value assignment into the config. Unknown keys throw with
/// the key name in the message.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Canonical flat key=value rendering of the resolved config. Re-parsing it
/// reproduces the run.
std::string emit_config(const ExperimentConfig& cfg);
/// FNV-1a hash of the canonical rendering, as a hex string.
std::string config_hash(const ExperimentConfig& cfg);

/// Loads or generates the dataset, applies the corruption, splits it.
struct PreparedData {
    LabeledDataset train;
    LabeledDataset val;
    double clean_fraction_mask = 1.0;   // train split, selection-based
    double clean_fraction_label = 1.0;  // train split, label-agreement-based
};
PreparedData prepare_data(const ExperimentConfig& cfg);

struct TrialOutcome {
    std::uint64_t seed = 0;
    EpochRecord final;
    double recovered_accuracy = 0.0;
    EarlyStopResult early_stop;
};

struct RunSummary {
    std::string run_dir;
    ExperimentConfig config;
    double clean_fraction_mask = 1.0;
    double clean_fraction_label = 1.0;
    std::vector<TrialOutcome> trials;
};

/// Executes `trials` seeded trainings, writing per-trial CSV logs, target and
/// model checkpoints, mode-specific artifacts, the resolved config and a JSON
/// summary into the run directory. Deterministic given (config, seed).
/// A relative output_dir resolves under $SAT_OUTPUT_ROOT when that is set.
RunSummary run(const ExperimentConfig& cfg);

enum class SweepAxis { NoiseRate, NoiseScheme, Width, Alpha, StartEpoch };

SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepSpec {
    SweepAxis axis = SweepAxis::NoiseRate;
    std::vector<std::string> values;  // rendered verbatim into run paths
    /// Width sweeps scale (E_s, alpha) by the capacity rule unless disabled.
    bool apply_capacity_rule = true;
    std::size_t base_width = 64;

    void validate() const;
};

struct SweepPointOutcome {
    std::string value;
    bool ok = false;
    std::string error;  // populated when the point failed
    RunSummary summary;  // valid when ok
};

/// One run per grid value plus a combined CSV keyed by the axis value.
/// A failing point is recorded and the sweep continues.
std::vector<SweepPointOutcome> sweep(const ExperimentConfig& cfg, const SweepSpec& spec);

/// Model checkpoint, magic "SATM".
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace sat

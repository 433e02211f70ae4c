// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code = number of failures.
//
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "satcore/adversarial.hpp"
#include "satcore/corruption.hpp"
#include "satcore/dataset.hpp"
#include "satcore/experiment.hpp"
#include "satcore/metrics.hpp"
#include "satcore/rng.hpp"
#include "satcore/sat.hpp"
#include "satcore/selective.hpp"
#include "support/objectives.hpp"

using namespace sat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int id;
    std::string name;
    bool pass;
    std::string detail;
    double seconds;
};

std::vector<Outcome> g_outcomes;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void record(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    g_outcomes.push_back({id, name, pass, detail, seconds});
    std::printf("[%s] criterion %2d %-26s %s (%.1fs)\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

void note(const std::string& message) {
    std::fprintf(stderr, "# %s\n", message.c_str());
    std::fflush(stderr);
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient suite
// ---------------------------------------------------------------------------

void criterion_1() {
    Timer timer;
    double worst = 0.0;
    std::string worst_name = "none";
    auto track = [&](const std::string& name, double err) {
        if (err > worst) {
            worst = err;
            worst_name = name;
        }
    };

    for (std::uint64_t trial = 0; trial < 3; ++trial) {
        Rng rng(100 + trial);
        const std::size_t in = 4 + trial, classes = 3 + trial, m = 6;
        MlpSpec spec{in, {10, 8}, classes};
        MlpModel model(spec, 200 + trial);
        const Tensor x = test_support::random_inputs(m, in, rng);
        const Tensor targets = test_support::random_simplex(m, classes, rng);
        std::vector<double> weights(m);
        for (std::size_t i = 0; i < m; ++i) weights[i] = sample_weight(targets.row(i));

        track("weighted-soft-target",
              finite_diff_check(model,
                                test_support::SatLossObjective(
                                    x, targets, weights, test_support::LossKind::Sat),
                                1e-5));
        track("symmetric-variant",
              finite_diff_check(model,
                                test_support::SatLossObjective(
                                    x, targets, weights, test_support::LossKind::Sce),
                                1e-5));
        Tensor onehot(m, classes);
        for (std::size_t i = 0; i < m; ++i) onehot.at(i, rng.uniform_index(classes)) = 1.0;
        track("cross-entropy",
              finite_diff_check(model,
                                test_support::SatLossObjective(
                                    x, onehot, std::vector<double>(m, 1.0),
                                    test_support::LossKind::Erm),
                                1e-5));

        // robust objective, adversarial batch held fixed
        Tensor x_adv = x;
        for (double& v : x_adv.data()) v += 0.05 * rng.normal();
        TradesConfig trades_cfg;
        trades_cfg.inv_lambda = 6.0;
        track("robust-objective",
              finite_diff_check(
                  model,
                  test_support::TradesObjective(x, x_adv, targets, weights, trades_cfg),
                  1e-5));

        // abstention head (output dim = classes + 1)
        MlpModel sel_model(MlpSpec{in, {9, 7}, classes + 1}, 300 + trial);
        std::vector<double> on_label(m);
        std::vector<std::uint32_t> labels(m);
        for (std::size_t i = 0; i < m; ++i) {
            on_label[i] = rng.uniform();
            labels[i] = static_cast<std::uint32_t>(rng.uniform_index(classes));
        }
        track("abstention",
              finite_diff_check(sel_model,
                                test_support::SelectiveObjective(x, on_label, labels),
                                1e-5));
    }
    record(1, "gradient-suite", worst < 1e-4,
           fmt("max rel err %.2e (worst: %s, tol 1e-4)", worst, worst_name.c_str()),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 2: reduction identity (bit-identical trajectories)
// ---------------------------------------------------------------------------

struct Trajectory {
    std::vector<std::vector<Tensor>> params_per_epoch;
};

Trajectory run_traced(const LabeledDataset& train_ds, const LabeledDataset& val_ds,
                      const MlpSpec& mlp, TrainConfig cfg) {
    Trajectory traj;
    cfg.epoch_callback = [&traj](std::size_t, const MlpModel& model) {
        traj.params_per_epoch.push_back(model.params());
    };
    train(train_ds, val_ds, mlp, cfg);
    return traj;
}

bool trajectories_equal(const Trajectory& a, const Trajectory& b) {
    if (a.params_per_epoch.size() != b.params_per_epoch.size()) return false;
    for (std::size_t e = 0; e < a.params_per_epoch.size(); ++e) {
        const auto& pa = a.params_per_epoch[e];
        const auto& pb = b.params_per_epoch[e];
        if (pa.size() != pb.size()) return false;
        for (std::size_t i = 0; i < pa.size(); ++i)
            if (!(pa[i] == pb[i])) return false;
    }
    return true;
}

void criterion_2() {
    Timer timer;
    LabeledDataset full =
        corrupt(gen_synthetic({SyntheticGenerator::GaussianBlobs, 5, 240, 16, 3.0, 2}),
                {CorruptionScheme::CorruptedLabels, 0.3, 3});
    auto [train_ds, val_ds] = split_train_val(full, 1000);
    MlpSpec mlp{16, {32, 32}, 5};

    TrainConfig base;
    base.mode = SatTrainMode::Erm;
    base.epochs = 12;
    base.batch_size = 128;
    base.seed = 9;
    base.sat = {2, 0.9};
    const Trajectory erm = run_traced(train_ds, val_ds, mlp, base);

    TrainConfig alpha_one = base;
    alpha_one.mode = SatTrainMode::Sat;
    alpha_one.sat = {2, 1.0};
    const bool ok_alpha =
        trajectories_equal(erm, run_traced(train_ds, val_ds, mlp, alpha_one));

    TrainConfig frozen = base;
    frozen.mode = SatTrainMode::Sat;
    frozen.sat = {12, 0.9};  // E_s >= epochs
    const bool ok_frozen =
        trajectories_equal(erm, run_traced(train_ds, val_ds, mlp, frozen));

    record(2, "reduction-identity", ok_alpha && ok_frozen,
           fmt("alpha=1 trajectory %s, E_s>=epochs trajectory %s (12 epochs, exact)",
               ok_alpha ? "bit-identical" : "DIFFERS",
               ok_frozen ? "bit-identical" : "DIFFERS"),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 3: simplex/weight invariants over a 50-epoch run
// ---------------------------------------------------------------------------

void criterion_3() {
    Timer timer;
    LabeledDataset full =
        corrupt(gen_synthetic({SyntheticGenerator::GaussianBlobs, 10, 240, 16, 3.5, 4}),
                {CorruptionScheme::CorruptedLabels, 0.4, 5});
    auto [train_ds, val_ds] = split_train_val(full, 2000);
    MlpSpec mlp{16, {32}, 10};
    TrainConfig cfg;
    cfg.mode = SatTrainMode::Sat;
    cfg.sat = {10, 0.9};
    cfg.epochs = 50;
    cfg.batch_size = 256;
    cfg.seed = 6;
    cfg.check_invariants = true;  // asserts inside the training loop, every epoch

    bool pass = true;
    std::string detail;
    try {
        const TrainResult r = train(train_ds, val_ds, mlp, cfg);
        r.store.check_simplex(1e-9);
        double w_min = 1.0, w_max = 0.0;
        for (std::size_t i = 0; i < r.store.size(); ++i) {
            const double w = r.store.weight(i);
            w_min = std::min(w_min, w);
            w_max = std::max(w_max, w);
        }
        pass = w_min >= 0.1 - 1e-9 && w_max <= 1.0 + 1e-9;
        detail = fmt("50 epochs, in-loop checks on; final weights in [%.6f, %.6f]", w_min,
                     w_max);
    } catch (const std::exception& e) {
        pass = false;
        detail = fmt("invariant violation: %s", e.what());
    }
    record(3, "simplex-weight-invariants", pass, detail, timer.seconds());
}

// ---------------------------------------------------------------------------
// Criteria 4-6 share three paired (sat, erm) trainings on the recovery profile.
// ---------------------------------------------------------------------------

struct RecoveryProfileRuns {
    double clean_fraction_mask = 1.0;
    std::vector<std::uint32_t> train_clean_labels;
    double clean_trained_acc = 0.0;  // separation validation
    std::vector<TrainResult> sat_runs;
    std::vector<TrainResult> erm_runs;
};

const RecoveryProfileRuns& recovery_runs() {
    static const RecoveryProfileRuns runs = [] {
        RecoveryProfileRuns out;
        const SyntheticSpec data_spec{SyntheticGenerator::GaussianBlobs, 10, 1200, 32,
                                      4.0, 1};
        const CorruptionSpec noise{CorruptionScheme::CorruptedLabels, 0.4, 7};
        const MlpSpec mlp{32, {128, 128}, 10};

        {
            note("criterion 4: training a clean model to validate the separation");
            LabeledDataset clean_full = gen_synthetic(data_spec);
            auto [clean_train, clean_val] = split_train_val(clean_full, 10000);
            TrainConfig cfg;
            cfg.mode = SatTrainMode::Erm;
            cfg.epochs = 40;
            cfg.batch_size = 256;
            cfg.seed = 1;
            const TrainResult r = train(clean_train, clean_val, mlp, cfg);
            out.clean_trained_acc = r.log.back().acc_clean_val;
        }

        LabeledDataset noisy_full = corrupt(gen_synthetic(data_spec), noise);
        auto [train_ds, val_ds] = split_train_val(noisy_full, 10000);
        out.clean_fraction_mask = clean_fraction_mask(train_ds);
        out.train_clean_labels = train_ds.clean_labels;

        for (std::uint64_t trial = 0; trial < 3; ++trial) {
            TrainConfig cfg;
            cfg.epochs = 300;
            cfg.batch_size = 256;
            cfg.seed = 1 + trial;
            cfg.sat = {60, 0.9};  // Algorithm defaults
            cfg.mode = SatTrainMode::Sat;
            note(fmt("criteria 4-6: self-adaptive run, trial %llu/3",
                     static_cast<unsigned long long>(trial + 1)));
            out.sat_runs.push_back(train(train_ds, val_ds, mlp, cfg));
            cfg.mode = SatTrainMode::Erm;
            note(fmt("criteria 4-6: baseline run, trial %llu/3",
                     static_cast<unsigned long long>(trial + 1)));
            out.erm_runs.push_back(train(train_ds, val_ds, mlp, cfg));
        }
        return out;
    }();
    return runs;
}

void criterion_4() {
    Timer timer;
    const RecoveryProfileRuns& runs = recovery_runs();
    const double recovered =
        recovered_accuracy(runs.sat_runs[0].store.targets, runs.train_clean_labels);
    const bool sep_ok = runs.clean_trained_acc >= 0.97;
    const bool rec_ok = recovered >= 0.85;
    record(4, "label-recovery", sep_ok && rec_ok,
           fmt("clean-trained acc %.4f (>= 0.97), recovered accuracy %.4f (>= 0.85)",
               runs.clean_trained_acc, recovered),
           timer.seconds());
}

void criterion_5() {
    Timer timer;
    const RecoveryProfileRuns& runs = recovery_runs();
    const EpochRecord& erm_final = runs.erm_runs[0].log.back();
    const EpochRecord& sat_final = runs.sat_runs[0].log.back();
    const double clean_fraction = runs.clean_fraction_mask;

    const bool erm_overfits = erm_final.acc_noisy_train >= 0.95;
    const bool sat_resists = sat_final.acc_noisy_train <= clean_fraction + 0.08;
    const double gap = sat_final.acc_clean_val - erm_final.acc_clean_val;
    const bool sat_generalizes = gap >= 0.05;
    // late-epoch generalization error (noisy train-val gap), paired seeds
    const bool gen_gap_ordered =
        generalization_error(erm_final) > generalization_error(sat_final);
    record(5, "overfitting-suppression",
           erm_overfits && sat_resists && sat_generalizes && gen_gap_ordered,
           fmt("erm noisy-train %.4f (>= 0.95); sat noisy-train %.4f (<= %.4f); "
               "clean-test gap %+.4f (>= 0.05); gen error erm %.4f > sat %.4f",
               erm_final.acc_noisy_train, sat_final.acc_noisy_train,
               clean_fraction + 0.08, gap, generalization_error(erm_final),
               generalization_error(sat_final)),
           timer.seconds());
}

void criterion_6() {
    Timer timer;
    const RecoveryProfileRuns& runs = recovery_runs();
    double sat_mean = 0.0, early_mean = 0.0;
    for (std::size_t t = 0; t < 3; ++t) {
        sat_mean += runs.sat_runs[t].log.back().acc_clean_val;
        early_mean += early_stop_select(runs.erm_runs[t].log).clean_val_accuracy;
    }
    sat_mean /= 3.0;
    early_mean /= 3.0;
    record(6, "early-stopping-dominated", sat_mean >= early_mean,
           fmt("sat final clean-test %.4f >= erm early-stopped %.4f (mean of 3 trials)",
               sat_mean, early_mean),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 7: selective classification on a 2-class Gaussian overlap
// ---------------------------------------------------------------------------

CalibratedThreshold brute_force_calibrate(const std::vector<double>& scores,
                                          double target) {
    std::vector<double> cands = scores;
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    const double n = static_cast<double>(scores.size());
    for (double tau : cands) {
        std::size_t covered = 0;
        for (double g : scores)
            if (g <= tau) ++covered;
        const double cov = static_cast<double>(covered) / n;
        if (cov >= target - 1e-12) return {tau, cov};
    }
    return {cands.back(), 1.0};
}

void criterion_7() {
    Timer timer;
    note("criterion 7: training the abstention classifier");
    LabeledDataset full =
        gen_synthetic({SyntheticGenerator::GaussianBlobs, 2, 1250, 4, 2.0, 11});
    auto [train_ds, val_ds] = split_train_val(full, 2000);
    MlpSpec mlp{4, {32, 32}, 2};
    SelectiveTrainConfig cfg;  // E_s = 0, alpha = 0.99
    cfg.epochs = 40;
    cfg.batch_size = 128;
    cfg.seed = 1;
    const SelectiveTrainResult r = train_selective(train_ds, val_ds, mlp, cfg);

    const std::vector<double> targets{1.0, 0.9, 0.8};
    const std::vector<CoveragePoint> pts = risk_coverage(r.model, val_ds, targets);
    const double quantile_step = 1.0 / static_cast<double>(val_ds.size());

    bool coverage_ok = true;
    for (const CoveragePoint& pt : pts)
        if (std::abs(pt.coverage_achieved - pt.coverage_target) > quantile_step + 1e-12)
            coverage_ok = false;
    const bool risk_ok = pts[2].defined && pts[0].defined &&
                         pts[2].selective_error < pts[0].selective_error;

    // exact agreement with the brute-force threshold scan (n = 500 <= 1000)
    const std::vector<double> scores = abstain_scores(r.model, val_ds.inputs);
    bool oracle_ok = true;
    for (double target : targets) {
        const CalibratedThreshold mine = calibrate_threshold(scores, target);
        const CalibratedThreshold ref = brute_force_calibrate(scores, target);
        if (mine.tau != ref.tau || mine.achieved_coverage != ref.achieved_coverage)
            oracle_ok = false;
    }

    record(7, "selective-classification", coverage_ok && risk_ok && oracle_ok,
           fmt("err@0.8 %.4f < err@1.0 %.4f; coverages within 1/n: %s; brute-force scan "
               "%s",
               pts[2].selective_error, pts[0].selective_error,
               coverage_ok ? "yes" : "NO", oracle_ok ? "matches exactly" : "MISMATCH"),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 8: adversarial sanity + robust-accuracy gap on the 2-d toy
// ---------------------------------------------------------------------------

void criterion_8() {
    Timer timer;
    // (a) feasibility, exact
    bool feasible = true;
    {
        Rng rng(81);
        MlpModel model(MlpSpec{5, {12}, 3}, 82);
        Tensor x(30, 5);
        for (double& v : x.data()) v = rng.uniform();
        std::vector<std::uint32_t> labels(30);
        for (auto& y : labels) y = static_cast<std::uint32_t>(rng.uniform_index(3));
        const AttackSpec atk{0.07, 0.02, 8, 0.0, 1.0};
        const Tensor adv =
            pgd_attack(model, x, labels, atk, AttackObjective::CeWrtLabel, 83);
        for (std::size_t i = 0; i < adv.size(); ++i) {
            if (std::abs(adv[i] - x[i]) > atk.epsilon + 1e-12) feasible = false;
            if (adv[i] < atk.bound_lo || adv[i] > atk.bound_hi) feasible = false;
        }
    }

    // (b) best-iterate rule: robust accuracy never exceeds clean accuracy
    bool bounded = true;
    {
        Rng rng(84);
        Tensor inputs(100, 4);
        for (double& v : inputs.data()) v = rng.uniform();
        std::vector<std::uint32_t> labels(100);
        for (auto& y : labels) y = static_cast<std::uint32_t>(rng.uniform_index(3));
        const LabeledDataset ds = make_dataset(std::move(inputs), std::move(labels), 3);
        const AttackSpec atk{0.12, 0.03, 6, 0.0, 1.0};
        for (std::uint64_t s = 0; s < 5; ++s) {
            MlpModel model(MlpSpec{4, {8}, 3}, 500 + s);
            if (robust_accuracy(model, ds, atk, s) >
                evaluate_accuracy(model, ds.inputs, ds.clean_labels))
                bounded = false;
        }
    }

    // (c) robust training on the interleaved-arcs toy. Feature span is 2
    // (coordinates in [-1, 1]), so epsilon = 0.1 * 2 = 0.2.
    const SyntheticSpec toy{SyntheticGenerator::Spirals, 2, 1000, 2, 50.0, 3};
    const AttackSpec eval_attack{0.2, 0.025, 20, -3.0, 3.0};
    LabeledDataset full = gen_synthetic(toy);
    auto [train_ds, val_ds] = split_train_val(full, 1600);
    const MlpSpec mlp{2, {64, 64}, 2};

    note("criterion 8: baseline training on the 2-d toy");
    double erm_robust = 0.0, trades_robust = 0.0;
    {
        TrainConfig cfg;
        cfg.mode = SatTrainMode::Erm;
        cfg.epochs = 100;
        cfg.batch_size = 128;
        cfg.seed = 1;
        const TrainResult r = train(train_ds, val_ds, mlp, cfg);
        erm_robust = robust_accuracy(r.model, val_ds, eval_attack, 42);
    }
    note("criterion 8: robust training on the 2-d toy");
    {
        AdvTrainConfig cfg;  // E_s = 70, alpha = 0.9, 1/lambda = 6
        cfg.mode = AdvTrainMode::TradesSat;
        cfg.trades.attack = {0.2, 0.05, 10, -3.0, 3.0};
        cfg.epochs = 100;
        cfg.batch_size = 128;
        cfg.seed = 1;
        cfg.robust_eval_every = 0;
        cfg.eval_attack = eval_attack;
        const TrainResult r = train_adversarial(train_ds, val_ds, mlp, cfg);
        trades_robust = robust_accuracy(r.model, val_ds, eval_attack, 42);
    }
    const double gap = trades_robust - erm_robust;

    record(8, "adversarial-sanity", feasible && bounded && gap >= 0.20,
           fmt("feasibility %s; robust<=clean %s; robust gap %+.4f "
               "(trades-sat %.4f vs erm %.4f, >= 0.20)",
               feasible ? "exact" : "VIOLATED", bounded ? "exact" : "VIOLATED", gap,
               trades_robust, erm_robust),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 9: capacity scaling rule
// ---------------------------------------------------------------------------

void criterion_9() {
    Timer timer;
    const CapacityParams w64 = capacity_sweep_params(64);
    const CapacityParams w32 = capacity_sweep_params(32);
    const CapacityParams w128 = capacity_sweep_params(128);
    const bool ok = w64.start_epoch == 40 && std::abs(w64.alpha - 0.9) < 5e-7 &&
                    w32.start_epoch == 80 &&
                    std::abs(w32.alpha - std::pow(0.9, 0.5)) < 5e-7 &&
                    w128.start_epoch == 20 && std::abs(w128.alpha - 0.81) < 5e-7;
    record(9, "capacity-scaling-rule", ok,
           fmt("width 64 -> (%zu, %.6f); 32 -> (%zu, %.6f); 128 -> (%zu, %.6f)",
               w64.start_epoch, w64.alpha, w32.start_epoch, w32.alpha, w128.start_epoch,
               w128.alpha),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 10: corruption statistics
// ---------------------------------------------------------------------------

void criterion_10() {
    Timer timer;
    const std::size_t n = 100000;
    LabeledDataset ds =
        gen_synthetic({SyntheticGenerator::GaussianBlobs, 10, n / 10, 4, 3.0, 10});

    // label-noise flip fraction = p (c-1)/c +- 0.01
    LabeledDataset labels = corrupt(ds, {CorruptionScheme::CorruptedLabels, 0.4, 11});
    std::size_t flips = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (labels.noisy_label_index(i) != labels.clean_labels[i]) ++flips;
    const double flip_fraction = static_cast<double>(flips) / static_cast<double>(n);
    const bool flips_ok = std::abs(flip_fraction - 0.36) <= 0.01;

    // gaussian scheme statistics within 3 standard errors
    double mean = 0.0;
    const std::size_t total = n * ds.dim();
    for (double v : ds.inputs.data()) mean += v;
    mean /= static_cast<double>(total);
    double var = 0.0;
    for (double v : ds.inputs.data()) var += (v - mean) * (v - mean);
    var /= static_cast<double>(total);

    LabeledDataset gauss = corrupt(ds, {CorruptionScheme::Gaussian, 0.5, 13});
    double rmean = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!gauss.corrupted_mask[i]) continue;
        for (double v : gauss.inputs.row(i)) {
            rmean += v;
            ++count;
        }
    }
    rmean /= static_cast<double>(count);
    double rvar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!gauss.corrupted_mask[i]) continue;
        for (double v : gauss.inputs.row(i)) rvar += (v - rmean) * (v - rmean);
    }
    rvar /= static_cast<double>(count);
    const double se_mean = std::sqrt(var / static_cast<double>(count));
    const double se_std = std::sqrt(var) / std::sqrt(2.0 * static_cast<double>(count));
    const bool gauss_ok = std::abs(rmean - mean) <= 3.0 * se_mean &&
                          std::abs(std::sqrt(rvar) - std::sqrt(var)) <= 3.0 * se_std;

    // p = 0 is a bitwise no-op for every scheme
    bool noop_ok = true;
    for (auto scheme : {CorruptionScheme::CorruptedLabels, CorruptionScheme::Gaussian,
                        CorruptionScheme::RandomPixels, CorruptionScheme::ShuffledPixels}) {
        const LabeledDataset out = corrupt(ds, {scheme, 0.0, 17});
        if (!(out.inputs == ds.inputs) || !(out.noisy_labels == ds.noisy_labels) ||
            out.any_corrupted())
            noop_ok = false;
    }

    record(10, "corruption-statistics", flips_ok && gauss_ok && noop_ok,
           fmt("flip fraction %.4f (0.36 +- 0.01); gaussian stats within 3 SE: %s; "
               "p=0 bitwise no-op: %s",
               flip_fraction, gauss_ok ? "yes" : "NO", noop_ok ? "yes" : "NO"),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 11: end-to-end run determinism
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void criterion_11() {
    Timer timer;
    const fs::path base = fs::temp_directory_path() / "satlab_acceptance_det";
    fs::remove_all(base);

    ExperimentConfig cfg;
    cfg.synthetic = {SyntheticGenerator::GaussianBlobs, 4, 200, 8, 3.5, 21};
    cfg.train_count = 640;
    cfg.corruption = {CorruptionScheme::CorruptedLabels, 0.3, 22};
    cfg.hidden = {24};
    cfg.mode = RunMode::Sat;
    cfg.sat_start_epoch = 3;
    cfg.epochs = 8;
    cfg.batch_size = 128;
    cfg.seed = 23;
    cfg.trials = 2;

    cfg.output_dir = (base / "a").string();
    run(cfg);
    cfg.output_dir = (base / "b").string();
    run(cfg);

    const bool csv_ok =
        slurp(base / "a" / "trial_0.csv") == slurp(base / "b" / "trial_0.csv") &&
        slurp(base / "a" / "trial_1.csv") == slurp(base / "b" / "trial_1.csv");
    const bool ckpt_ok = slurp(base / "a" / "trial_0_targets.satt") ==
                             slurp(base / "b" / "trial_0_targets.satt") &&
                         slurp(base / "a" / "trial_0_model.satm") ==
                             slurp(base / "b" / "trial_0_model.satm");

    // identical config (same output dir): the JSON summary reproduces too
    cfg.output_dir = (base / "a").string();
    const std::string summary_before = slurp(base / "a" / "summary.json");
    run(cfg);
    const bool summary_ok = slurp(base / "a" / "summary.json") == summary_before;

    fs::remove_all(base);
    record(11, "run-determinism", csv_ok && ckpt_ok && summary_ok,
           fmt("trial CSVs byte-identical: %s; checkpoints: %s; summary: %s",
               csv_ok ? "yes" : "NO", ckpt_ok ? "yes" : "NO", summary_ok ? "yes" : "NO"),
           timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };

    if (wanted(1)) criterion_1();
    if (wanted(2)) criterion_2();
    if (wanted(3)) criterion_3();
    if (wanted(4)) criterion_4();
    if (wanted(5)) criterion_5();
    if (wanted(6)) criterion_6();
    if (wanted(7)) criterion_7();
    if (wanted(8)) criterion_8();
    if (wanted(9)) criterion_9();
    if (wanted(10)) criterion_10();
    if (wanted(11)) criterion_11();

    int failures = 0;
    for (const Outcome& o : g_outcomes)
        if (!o.pass) ++failures;
    std::printf("%zu criteria run, %d failed\n", g_outcomes.size(), failures);
    return failures;
}

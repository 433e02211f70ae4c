// Command line front end for the self-adaptive training toolkit.
//
// Exit codes: 0 ok, 1 configuration/input error, 2 runtime divergence.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "satcore/adversarial.hpp"
#include "satcore/corruption.hpp"
#include "satcore/error.hpp"
#include "satcore/experiment.hpp"
#include "satcore/metrics.hpp"
#include "satcore/selective.hpp"

namespace {

struct ConfigCli {
    std::string config_file;
    std::vector<std::string> sets;  // key=value overrides, applied in order
    // Common direct flags; empty/-1 means "not given".
    std::string mode, scheme, output_dir, hidden;
    double rate = -1.0, lr0 = -1.0, alpha = -1.0, separation = -1.0;
    long long epochs = -1, batch_size = -1, trials = -1, start_epoch = -1;
    long long seed = -1, corruption_seed = -1, data_seed = -1, train_count = -1;
};

void add_config_options(CLI::App* cmd, ConfigCli& opts) {
    cmd->add_option("--config", opts.config_file, "flat key=value config file");
    cmd->add_option("--set", opts.sets, "override a config entry, e.g. --set sat.alpha=0.9");
    cmd->add_option("--mode", opts.mode, "train.mode");
    cmd->add_option("--scheme", opts.scheme, "corruption.scheme");
    cmd->add_option("--rate", opts.rate, "corruption.rate");
    cmd->add_option("--corruption-seed", opts.corruption_seed, "corruption.seed");
    cmd->add_option("--data-seed", opts.data_seed, "dataset.seed");
    cmd->add_option("--train-count", opts.train_count, "dataset.train_count");
    cmd->add_option("--separation", opts.separation, "dataset.separation");
    cmd->add_option("--hidden", opts.hidden, "model.hidden, e.g. 256,256");
    cmd->add_option("--lr0", opts.lr0, "optim.lr0");
    cmd->add_option("--alpha", opts.alpha, "sat.alpha");
    cmd->add_option("--start-epoch", opts.start_epoch, "sat.start_epoch");
    cmd->add_option("--epochs", opts.epochs, "train.epochs");
    cmd->add_option("--batch-size", opts.batch_size, "train.batch_size");
    cmd->add_option("--seed", opts.seed, "train.seed");
    cmd->add_option("--trials", opts.trials, "train.trials");
    cmd->add_option("--out", opts.output_dir, "output.dir");
}

sat::ExperimentConfig build_config(const ConfigCli& opts) {
    sat::ExperimentConfig cfg;
    if (!opts.config_file.empty()) cfg = sat::parse_config_file(opts.config_file);
    for (const std::string& entry : opts.sets) {
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + entry + "'");
        sat::apply_config_entry(cfg, entry.substr(0, eq), entry.substr(eq + 1));
    }
    auto set = [&cfg](const std::string& key, const std::string& value) {
        sat::apply_config_entry(cfg, key, value);
    };
    if (!opts.mode.empty()) set("train.mode", opts.mode);
    if (!opts.scheme.empty()) set("corruption.scheme", opts.scheme);
    if (opts.rate >= 0.0) set("corruption.rate", std::to_string(opts.rate));
    if (opts.corruption_seed >= 0)
        set("corruption.seed", std::to_string(opts.corruption_seed));
    if (opts.data_seed >= 0) set("dataset.seed", std::to_string(opts.data_seed));
    if (opts.train_count >= 0) set("dataset.train_count", std::to_string(opts.train_count));
    if (opts.separation >= 0.0) set("dataset.separation", std::to_string(opts.separation));
    if (!opts.hidden.empty()) set("model.hidden", opts.hidden);
    if (opts.lr0 >= 0.0) set("optim.lr0", std::to_string(opts.lr0));
    if (opts.alpha >= 0.0) set("sat.alpha", std::to_string(opts.alpha));
    if (opts.start_epoch >= 0) set("sat.start_epoch", std::to_string(opts.start_epoch));
    if (opts.epochs >= 0) set("train.epochs", std::to_string(opts.epochs));
    if (opts.batch_size >= 0) set("train.batch_size", std::to_string(opts.batch_size));
    if (opts.seed >= 0) set("train.seed", std::to_string(opts.seed));
    if (opts.trials >= 0) set("train.trials", std::to_string(opts.trials));
    if (!opts.output_dir.empty()) set("output.dir", opts.output_dir);
    return cfg;
}

void print_run_summary(const sat::RunSummary& summary) {
    std::printf("run dir: %s\n", summary.run_dir.c_str());
    std::printf("clean fraction (mask/label): %.4f / %.4f\n", summary.clean_fraction_mask,
                summary.clean_fraction_label);
    for (std::size_t t = 0; t < summary.trials.size(); ++t) {
        const sat::TrialOutcome& o = summary.trials[t];
        std::printf(
            "trial %zu  seed=%llu  clean_val=%.4f  noisy_val=%.4f  recovered=%.4f\n", t,
            static_cast<unsigned long long>(o.seed), o.final.acc_clean_val,
            o.final.acc_noisy_val, o.recovered_accuracy);
    }
}

int run_command(const ConfigCli& opts) {
    const sat::RunSummary summary = sat::run(build_config(opts));
    print_run_summary(summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-adaptive training toolkit"};
    app.require_subcommand(1);

    // ---- corrupt ----
    ConfigCli corrupt_opts;
    std::string corrupt_out;
    CLI::App* cmd_corrupt =
        app.add_subcommand("corrupt", "generate or load a dataset and corrupt it");
    add_config_options(cmd_corrupt, corrupt_opts);
    cmd_corrupt->add_option("--snapshot-out", corrupt_out, "output snapshot path")
        ->required();

    // ---- train ----
    ConfigCli train_opts;
    CLI::App* cmd_train = app.add_subcommand("train", "run a training experiment");
    add_config_options(cmd_train, train_opts);

    // ---- eval ----
    std::string eval_model, eval_data, eval_csv;
    bool eval_attack = false;
    sat::AttackSpec eval_spec;
    CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a model checkpoint");
    cmd_eval->add_option("--model", eval_model, "model checkpoint (.satm)")->required();
    cmd_eval->add_option("--data", eval_data, "dataset snapshot (.satd)")->required();
    cmd_eval->add_flag("--attack", eval_attack, "also report robust accuracy under PGD");
    cmd_eval->add_option("--epsilon", eval_spec.epsilon, "attack radius");
    cmd_eval->add_option("--step-size", eval_spec.step_size, "attack step size");
    cmd_eval->add_option("--steps", eval_spec.steps, "attack steps");
    cmd_eval->add_option("--bound-lo", eval_spec.bound_lo, "pixel lower bound");
    cmd_eval->add_option("--bound-hi", eval_spec.bound_hi, "pixel upper bound");
    cmd_eval->add_option("--csv", eval_csv, "write {epoch,clean_acc,robust_acc} CSV");

    // ---- sweep ----
    ConfigCli sweep_opts;
    std::string sweep_axis;
    std::vector<std::string> sweep_values;
    bool no_capacity_rule = false;
    long long base_width = 64;
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run a grid of experiments");
    add_config_options(cmd_sweep, sweep_opts);
    cmd_sweep->add_option("--axis", sweep_axis,
                          "noise_rate|noise_scheme|width|alpha|start_epoch")
        ->required();
    cmd_sweep->add_option("--values", sweep_values, "grid values")->required();
    cmd_sweep->add_flag("--no-capacity-rule", no_capacity_rule,
                        "do not scale (E_s, alpha) with width");
    cmd_sweep->add_option("--base-width", base_width, "capacity rule base width");

    // ---- selective ----
    ConfigCli selective_opts;
    std::string coverages;
    CLI::App* cmd_selective =
        app.add_subcommand("selective", "train an abstention classifier");
    add_config_options(cmd_selective, selective_opts);
    cmd_selective->add_option("--coverages", coverages, "e.g. 1.0,0.9,0.8");

    // ---- adversarial ----
    ConfigCli adv_opts;
    CLI::App* cmd_adv = app.add_subcommand("adversarial", "robust training (TRADES)");
    add_config_options(cmd_adv, adv_opts);

    // ---- recover-report ----
    std::string rec_targets, rec_data, rec_out;
    CLI::App* cmd_recover =
        app.add_subcommand("recover-report", "label recovery report from a checkpoint");
    cmd_recover->add_option("--targets", rec_targets, "target checkpoint (.satt)")
        ->required();
    cmd_recover->add_option("--data", rec_data, "dataset snapshot (.satd)")->required();
    cmd_recover->add_option("--json-out", rec_out, "write the report as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_corrupt->parsed()) {
            const sat::ExperimentConfig cfg = build_config(corrupt_opts);
            sat::LabeledDataset full;
            switch (cfg.source) {
                case sat::ExperimentConfig::Source::Synthetic:
                    full = sat::gen_synthetic(cfg.synthetic);
                    break;
                case sat::ExperimentConfig::Source::Cifar:
                    full = sat::load_cifar_binary(cfg.dataset_path);
                    break;
                case sat::ExperimentConfig::Source::Idx:
                    full = sat::load_idx(cfg.images_path, cfg.labels_path);
                    break;
                case sat::ExperimentConfig::Source::Snapshot:
                    full = sat::load_dataset(cfg.dataset_path);
                    break;
            }
            full = sat::corrupt(full, cfg.corruption);
            sat::save_dataset(full, corrupt_out);
            std::printf("wrote %s: n=%zu d=%zu c=%zu scheme=%s rate=%g\n",
                        corrupt_out.c_str(), full.size(), full.dim(), full.class_count,
                        sat::to_string(cfg.corruption.scheme).c_str(),
                        cfg.corruption.rate);
            std::printf("clean fraction (mask/label): %.4f / %.4f\n",
                        sat::clean_fraction_mask(full), sat::clean_fraction_label(full));
            return 0;
        }
        if (cmd_train->parsed()) return run_command(train_opts);
        if (cmd_selective->parsed()) {
            ConfigCli opts = selective_opts;
            if (opts.mode.empty()) opts.mode = "selective";
            if (!coverages.empty())
                opts.sets.push_back("selective.coverages=" + coverages);
            return run_command(opts);
        }
        if (cmd_adv->parsed()) {
            ConfigCli opts = adv_opts;
            if (opts.mode.empty()) opts.mode = "trades_sat";
            return run_command(opts);
        }
        if (cmd_sweep->parsed()) {
            sat::SweepSpec spec;
            spec.axis = sat::parse_sweep_axis(sweep_axis);
            spec.values = sweep_values;
            spec.apply_capacity_rule = !no_capacity_rule;
            spec.base_width = static_cast<std::size_t>(base_width);
            const auto outcomes = sat::sweep(build_config(sweep_opts), spec);
            for (const sat::SweepPointOutcome& o : outcomes) {
                if (o.ok)
                    std::printf("%s=%s  ok  (%s)\n", sweep_axis.c_str(), o.value.c_str(),
                                o.summary.run_dir.c_str());
                else
                    std::printf("%s=%s  FAILED: %s\n", sweep_axis.c_str(), o.value.c_str(),
                                o.error.c_str());
            }
            return 0;
        }
        if (cmd_eval->parsed()) {
            const sat::MlpModel model = sat::load_model(eval_model);
            const sat::LabeledDataset ds = sat::load_dataset(eval_data);
            const double clean =
                sat::evaluate_accuracy(model, ds.clean_input_view(), ds.clean_labels);
            std::printf("clean_acc=%.6f\n", clean);
            double robust = 0.0;
            if (eval_attack) {
                robust = sat::robust_accuracy(model, ds, eval_spec, /*seed=*/0);
                std::printf("robust_acc=%.6f\n", robust);
            }
            if (!eval_csv.empty()) {
                std::vector<sat::EpochRecord> rows(1);
                rows[0].epoch = 0;
                rows[0].acc_clean_val = clean;
                if (eval_attack) rows[0].robust_acc = robust;
                sat::emit_robustness_csv(rows, eval_csv);
            }
            return 0;
        }
        if (cmd_recover->parsed()) {
            const sat::TargetStore store = sat::load_targets(rec_targets);
            const sat::LabeledDataset ds = sat::load_dataset(rec_data);
            if (store.size() > ds.size())
                throw std::invalid_argument(
                    "recover-report: target store is larger than the dataset");
            // Training stores cover the head of the dataset (splits keep order).
            const std::vector<std::uint32_t> clean(
                ds.clean_labels.begin(), ds.clean_labels.begin() + store.size());
            const sat::RecoveryReport rep = sat::recovery_report(store.targets, clean);
            std::printf("recovered_accuracy=%.6f (epoch %zu)\n", rep.recovered_acc,
                        store.last_updated_epoch);
            std::printf("confusion (clean x recovered):\n");
            for (const auto& row : rep.confusion) {
                for (std::size_t j = 0; j < row.size(); ++j)
                    std::printf("%s%zu", j ? " " : "  ", row[j]);
                std::printf("\n");
            }
            if (!rec_out.empty()) {
                nlohmann::json j;
                j["recovered_accuracy"] = rep.recovered_acc;
                j["last_updated_epoch"] = store.last_updated_epoch;
                j["confusion"] = rep.confusion;
                nlohmann::json weights = nlohmann::json::array();
                for (std::size_t i = 0; i < rep.weight_matrix.size(); ++i) {
                    nlohmann::json row = nlohmann::json::array();
                    for (std::size_t k = 0; k < rep.weight_matrix[i].size(); ++k) {
                        if (rep.present[i][k])
                            row.push_back(rep.weight_matrix[i][k]);
                        else
                            row.push_back(nullptr);
                    }
                    weights.push_back(row);
                }
                j["weight_matrix"] = weights;
                std::ofstream out(rec_out, std::ios::trunc);
                out << j.dump(2) << "\n";
            }
            return 0;
        }
    } catch (const sat::DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

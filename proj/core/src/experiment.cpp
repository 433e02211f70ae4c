#include "satcore/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "satcore/error.hpp"
#include "satcore/selective.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sat {

RunMode parse_run_mode(const std::string& name) {
    if (name == "erm") return RunMode::Erm;
    if (name == "sat") return RunMode::Sat;
    if (name == "sat_sce") return RunMode::SatSce;
    if (name == "selective") return RunMode::Selective;
    if (name == "trades") return RunMode::Trades;
    if (name == "trades_sat") return RunMode::TradesSat;
    throw std::invalid_argument("unknown mode: " + name);
}

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Erm: return "erm";
        case RunMode::Sat: return "sat";
        case RunMode::SatSce: return "sat_sce";
        case RunMode::Selective: return "selective";
        case RunMode::Trades: return "trades";
        case RunMode::TradesSat: return "trades_sat";
    }
    throw std::invalid_argument("unknown mode");
}

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "noise_rate") return SweepAxis::NoiseRate;
    if (name == "noise_scheme") return SweepAxis::NoiseScheme;
    if (name == "width") return SweepAxis::Width;
    if (name == "alpha") return SweepAxis::Alpha;
    if (name == "start_epoch") return SweepAxis::StartEpoch;
    throw std::invalid_argument("unknown sweep axis: " + name);
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::NoiseRate: return "noise_rate";
        case SweepAxis::NoiseScheme: return "noise_scheme";
        case SweepAxis::Width: return "width";
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::StartEpoch: return "start_epoch";
    }
    throw std::invalid_argument("unknown sweep axis");
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v +
                                    "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument(key + ": expected true/false, got '" + v + "'");
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& v, F item) {
    std::vector<T> out;
    if (trim(v).empty()) return out;
    std::istringstream in(v);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(item(key, trim(tok)));
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string source_name(ExperimentConfig::Source s) {
    switch (s) {
        case ExperimentConfig::Source::Synthetic: return "synthetic";
        case ExperimentConfig::Source::Cifar: return "cifar";
        case ExperimentConfig::Source::Idx: return "idx";
        case ExperimentConfig::Source::Snapshot: return "snapshot";
    }
    throw std::invalid_argument("unknown dataset source");
}

std::string generator_name(SyntheticGenerator g) {
    return g == SyntheticGenerator::GaussianBlobs ? "gaussian_blobs" : "spirals";
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "dataset.source") {
        if (value == "synthetic") cfg.source = ExperimentConfig::Source::Synthetic;
        else if (value == "cifar") cfg.source = ExperimentConfig::Source::Cifar;
        else if (value == "idx") cfg.source = ExperimentConfig::Source::Idx;
        else if (value == "snapshot") cfg.source = ExperimentConfig::Source::Snapshot;
        else throw std::invalid_argument("dataset.source: unknown source '" + value + "'");
    } else if (key == "dataset.path") {
        cfg.dataset_path = value;
    } else if (key == "dataset.images") {
        cfg.images_path = value;
    } else if (key == "dataset.labels") {
        cfg.labels_path = value;
    } else if (key == "dataset.generator") {
        if (value == "gaussian_blobs")
            cfg.synthetic.generator = SyntheticGenerator::GaussianBlobs;
        else if (value == "spirals")
            cfg.synthetic.generator = SyntheticGenerator::Spirals;
        else
            throw std::invalid_argument("dataset.generator: unknown generator '" + value +
                                        "'");
    } else if (key == "dataset.classes") {
        cfg.synthetic.classes = parse_u64(key, value);
    } else if (key == "dataset.per_class") {
        cfg.synthetic.per_class = parse_u64(key, value);
    } else if (key == "dataset.dim") {
        cfg.synthetic.dim = parse_u64(key, value);
    } else if (key == "dataset.separation") {
        cfg.synthetic.separation = parse_double(key, value);
    } else if (key == "dataset.seed") {
        cfg.synthetic.seed = parse_u64(key, value);
    } else if (key == "dataset.train_count") {
        cfg.train_count = parse_u64(key, value);
    } else if (key == "corruption.scheme") {
        cfg.corruption.scheme = parse_corruption_scheme(value);
    } else if (key == "corruption.rate") {
        cfg.corruption.rate = parse_double(key, value);
    } else if (key == "corruption.seed") {
        cfg.corruption.seed = parse_u64(key, value);
    } else if (key == "model.hidden") {
        cfg.hidden = parse_list<std::size_t>(key, value, [](const std::string& k,
                                                            const std::string& t) {
            return static_cast<std::size_t>(parse_u64(k, t));
        });
    } else if (key == "model.activation") {
        if (value != "relu")
            throw std::invalid_argument("model.activation: only 'relu' is supported");
    } else if (key == "optim.lr0") {
        cfg.optim.lr0 = parse_double(key, value);
    } else if (key == "optim.momentum") {
        cfg.optim.momentum = parse_double(key, value);
    } else if (key == "optim.weight_decay") {
        cfg.optim.weight_decay = parse_double(key, value);
    } else if (key == "sat.start_epoch") {
        cfg.sat_start_epoch = parse_u64(key, value);
    } else if (key == "sat.alpha") {
        cfg.sat_alpha = parse_double(key, value);
    } else if (key == "trades.inv_lambda") {
        cfg.trades.inv_lambda = parse_double(key, value);
    } else if (key == "attack.epsilon") {
        cfg.trades.attack.epsilon = parse_double(key, value);
    } else if (key == "attack.step_size") {
        cfg.trades.attack.step_size = parse_double(key, value);
    } else if (key == "attack.steps") {
        cfg.trades.attack.steps = parse_u64(key, value);
    } else if (key == "attack.bound_lo") {
        cfg.trades.attack.bound_lo = parse_double(key, value);
    } else if (key == "attack.bound_hi") {
        cfg.trades.attack.bound_hi = parse_double(key, value);
    } else if (key == "eval_attack.epsilon") {
        cfg.eval_attack.epsilon = parse_double(key, value);
    } else if (key == "eval_attack.step_size") {
        cfg.eval_attack.step_size = parse_double(key, value);
    } else if (key == "eval_attack.steps") {
        cfg.eval_attack.steps = parse_u64(key, value);
    } else if (key == "eval_attack.bound_lo") {
        cfg.eval_attack.bound_lo = parse_double(key, value);
    } else if (key == "eval_attack.bound_hi") {
        cfg.eval_attack.bound_hi = parse_double(key, value);
    } else if (key == "train.mode") {
        cfg.mode = parse_run_mode(value);
    } else if (key == "train.epochs") {
        cfg.epochs = parse_u64(key, value);
    } else if (key == "train.batch_size") {
        cfg.batch_size = parse_u64(key, value);
    } else if (key == "train.seed") {
        cfg.seed = parse_u64(key, value);
    } else if (key == "train.trials") {
        cfg.trials = parse_u64(key, value);
    } else if (key == "train.robust_eval_every") {
        cfg.robust_eval_every = parse_u64(key, value);
    } else if (key == "selective.coverages") {
        cfg.coverages = parse_list<double>(key, value, parse_double);
    } else if (key == "augment.enabled") {
        cfg.augment = parse_bool(key, value);
    } else if (key == "output.dir") {
        cfg.output_dir = value;
    } else {
        throw std::invalid_argument("unknown config key: " + key);
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value, got '" + t + "'");
        apply_config_entry(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

SatConfig ExperimentConfig::sat_config() const {
    SatConfig sc;
    switch (mode) {
        case RunMode::Selective: sc = {0, 0.99}; break;
        case RunMode::Trades:
        case RunMode::TradesSat: sc = {70, 0.9}; break;
        default: sc = {60, 0.9}; break;
    }
    if (sat_start_epoch) sc.start_epoch = *sat_start_epoch;
    if (sat_alpha) sc.alpha = *sat_alpha;
    return sc;
}

void ExperimentConfig::validate() const {
    if (augment)
        throw std::invalid_argument(
            "augment.enabled: data augmentation is not implemented");
    if (epochs < 1) throw std::invalid_argument("train.epochs: must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train.batch_size: must be >= 1");
    if (trials < 1) throw std::invalid_argument("train.trials: must be >= 1");
    if (train_count < 1) throw std::invalid_argument("dataset.train_count: must be >= 1");
    switch (source) {
        case Source::Synthetic: synthetic.validate(); break;
        case Source::Cifar:
        case Source::Snapshot:
            if (!fs::exists(dataset_path))
                throw std::invalid_argument("dataset.path: no such file: " + dataset_path);
            break;
        case Source::Idx:
            if (!fs::exists(images_path))
                throw std::invalid_argument("dataset.images: no such file: " + images_path);
            if (!fs::exists(labels_path))
                throw std::invalid_argument("dataset.labels: no such file: " + labels_path);
            break;
    }
    corruption.validate();
    optim.validate();
    sat_config().validate();
    if (mode == RunMode::Trades || mode == RunMode::TradesSat) {
        trades.validate();
        eval_attack.validate();
    }
    if (mode == RunMode::Selective) {
        if (coverages.empty())
            throw std::invalid_argument("selective.coverages: must not be empty");
        for (double c : coverages)
            if (!(c > 0.0) || c > 1.0)
                throw std::invalid_argument("selective.coverages: values must be in (0, 1]");
    }
}

std::string emit_config(const ExperimentConfig& cfg) {
    const SatConfig sc = cfg.sat_config();
    std::ostringstream out;
    out << "dataset.source=" << source_name(cfg.source) << "\n";
    out << "dataset.path=" << cfg.dataset_path << "\n";
    out << "dataset.images=" << cfg.images_path << "\n";
    out << "dataset.labels=" << cfg.labels_path << "\n";
    out << "dataset.generator=" << generator_name(cfg.synthetic.generator) << "\n";
    out << "dataset.classes=" << cfg.synthetic.classes << "\n";
    out << "dataset.per_class=" << cfg.synthetic.per_class << "\n";
    out << "dataset.dim=" << cfg.synthetic.dim << "\n";
    out << "dataset.separation=" << fmt_double(cfg.synthetic.separation) << "\n";
    out << "dataset.seed=" << cfg.synthetic.seed << "\n";
    out << "dataset.train_count=" << cfg.train_count << "\n";
    out << "corruption.scheme=" << to_string(cfg.corruption.scheme) << "\n";
    out << "corruption.rate=" << fmt_double(cfg.corruption.rate) << "\n";
    out << "corruption.seed=" << cfg.corruption.seed << "\n";
    out << "model.hidden=";
    for (std::size_t i = 0; i < cfg.hidden.size(); ++i)
        out << (i ? "," : "") << cfg.hidden[i];
    out << "\n";
    out << "model.activation=relu\n";
    out << "optim.lr0=" << fmt_double(cfg.optim.lr0) << "\n";
    out << "optim.momentum=" << fmt_double(cfg.optim.momentum) << "\n";
    out << "optim.weight_decay=" << fmt_double(cfg.optim.weight_decay) << "\n";
    out << "sat.start_epoch=" << sc.start_epoch << "\n";
    out << "sat.alpha=" << fmt_double(sc.alpha) << "\n";
    out << "trades.inv_lambda=" << fmt_double(cfg.trades.inv_lambda) << "\n";
    out << "attack.epsilon=" << fmt_double(cfg.trades.attack.epsilon) << "\n";
    out << "attack.step_size=" << fmt_double(cfg.trades.attack.step_size) << "\n";
    out << "attack.steps=" << cfg.trades.attack.steps << "\n";
    out << "attack.bound_lo=" << fmt_double(cfg.trades.attack.bound_lo) << "\n";
    out << "attack.bound_hi=" << fmt_double(cfg.trades.attack.bound_hi) << "\n";
    out << "eval_attack.epsilon=" << fmt_double(cfg.eval_attack.epsilon) << "\n";
    out << "eval_attack.step_size=" << fmt_double(cfg.eval_attack.step_size) << "\n";
    out << "eval_attack.steps=" << cfg.eval_attack.steps << "\n";
    out << "eval_attack.bound_lo=" << fmt_double(cfg.eval_attack.bound_lo) << "\n";
    out << "eval_attack.bound_hi=" << fmt_double(cfg.eval_attack.bound_hi) << "\n";
    out << "train.mode=" << to_string(cfg.mode) << "\n";
    out << "train.epochs=" << cfg.epochs << "\n";
    out << "train.batch_size=" << cfg.batch_size << "\n";
    out << "train.seed=" << cfg.seed << "\n";
    out << "train.trials=" << cfg.trials << "\n";
    out << "train.robust_eval_every=" << cfg.robust_eval_every << "\n";
    out << "selective.coverages=";
    for (std::size_t i = 0; i < cfg.coverages.size(); ++i)
        out << (i ? "," : "") << fmt_double(cfg.coverages[i]);
    out << "\n";
    out << "augment.enabled=" << (cfg.augment ? "true" : "false") << "\n";
    out << "output.dir=" << cfg.output_dir << "\n";
    return out.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = emit_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Data preparation and run execution
// ---------------------------------------------------------------------------

PreparedData prepare_data(const ExperimentConfig& cfg) {
    LabeledDataset full;
    switch (cfg.source) {
        case ExperimentConfig::Source::Synthetic: full = gen_synthetic(cfg.synthetic); break;
        case ExperimentConfig::Source::Cifar: full = load_cifar_binary(cfg.dataset_path); break;
        case ExperimentConfig::Source::Idx: full = load_idx(cfg.images_path, cfg.labels_path); break;
        case ExperimentConfig::Source::Snapshot: full = load_dataset(cfg.dataset_path); break;
    }
    if (!(full.any_corrupted() && cfg.corruption.scheme == CorruptionScheme::None))
        full = corrupt(full, cfg.corruption);
    auto [train, val] = split_train_val(full, cfg.train_count);
    PreparedData data;
    data.clean_fraction_mask = clean_fraction_mask(train);
    data.clean_fraction_label = clean_fraction_label(train);
    data.train = std::move(train);
    data.val = std::move(val);
    return data;
}

namespace {

fs::path resolve_output_dir(const std::string& dir) {
    fs::path p(dir);
    if (p.is_absolute()) return p;
    if (const char* root = std::getenv("SAT_OUTPUT_ROOT")) return fs::path(root) / p;
    return p;
}

MlpSpec make_mlp_spec(const ExperimentConfig& cfg, std::size_t input_dim,
                      std::size_t classes) {
    MlpSpec spec;
    spec.input_dim = input_dim;
    spec.hidden_widths = cfg.hidden;
    spec.num_classes = classes;
    return spec;
}

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;
};

Stats mean_std(const std::vector<double>& xs) {
    Stats s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
    return s;
}

json record_json(const EpochRecord& r) {
    json j{{"epoch", r.epoch},
           {"lr", r.lr},
           {"loss", r.loss},
           {"acc_noisy_train", r.acc_noisy_train},
           {"acc_clean_train", r.acc_clean_train},
           {"acc_noisy_val", r.acc_noisy_val},
           {"acc_clean_val", r.acc_clean_val}};
    if (r.robust_acc) j["robust_acc"] = *r.robust_acc;
    return j;
}

json report_json(const RecoveryReport& rep) {
    json j;
    j["recovered_accuracy"] = rep.recovered_acc;
    j["confusion"] = rep.confusion;
    json weights = json::array();
    for (std::size_t i = 0; i < rep.weight_matrix.size(); ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < rep.weight_matrix[i].size(); ++k) {
            if (rep.present[i][k])
                row.push_back(rep.weight_matrix[i][k]);
            else
                row.push_back(nullptr);  // empty cell
        }
        weights.push_back(row);
    }
    j["weight_matrix"] = weights;
    return j;
}

}  // namespace

RunSummary run(const ExperimentConfig& input_cfg) {
    ExperimentConfig cfg = input_cfg;
    cfg.validate();
    const SatConfig sc = cfg.sat_config();
    cfg.sat_start_epoch = sc.start_epoch;  // echo resolved values
    cfg.sat_alpha = sc.alpha;

    const fs::path out_dir = resolve_output_dir(cfg.output_dir);
    fs::create_directories(out_dir);
    {
        std::ofstream cf(out_dir / "config.resolved.txt", std::ios::trunc);
        cf << emit_config(cfg);
    }

    PreparedData data = prepare_data(cfg);
    const MlpSpec mlp = make_mlp_spec(cfg, data.train.dim(), data.train.class_count);

    RunSummary summary;
    summary.run_dir = out_dir.string();
    summary.config = cfg;
    summary.clean_fraction_mask = data.clean_fraction_mask;
    summary.clean_fraction_label = data.clean_fraction_label;

    json jtrials = json::array();
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        const std::uint64_t trial_seed = cfg.seed + t;
        const std::string tag = "trial_" + std::to_string(t);

        TrainResult result;
        switch (cfg.mode) {
            case RunMode::Erm:
            case RunMode::Sat:
            case RunMode::SatSce: {
                TrainConfig tc;
                tc.mode = cfg.mode == RunMode::Erm   ? SatTrainMode::Erm
                          : cfg.mode == RunMode::Sat ? SatTrainMode::Sat
                                                     : SatTrainMode::SatSce;
                tc.sat = sc;
                tc.optim = cfg.optim;
                tc.epochs = cfg.epochs;
                tc.batch_size = cfg.batch_size;
                tc.seed = trial_seed;
                result = train(data.train, data.val, mlp, tc);
                break;
            }
            case RunMode::Selective: {
                SelectiveTrainConfig tc;
                tc.sat = sc;
                tc.optim = cfg.optim;
                tc.epochs = cfg.epochs;
                tc.batch_size = cfg.batch_size;
                tc.seed = trial_seed;
                SelectiveTrainResult r = train_selective(data.train, data.val, mlp, tc);
                emit_risk_coverage_csv(risk_coverage(r.model, data.val, cfg.coverages),
                                       (out_dir / (tag + "_risk_coverage.csv")).string());
                result.model = std::move(r.model.net);
                result.store = std::move(r.store);
                result.log = std::move(r.log);
                break;
            }
            case RunMode::Trades:
            case RunMode::TradesSat: {
                AdvTrainConfig tc;
                tc.mode = cfg.mode == RunMode::Trades ? AdvTrainMode::Trades
                                                      : AdvTrainMode::TradesSat;
                tc.sat = sc;
                tc.optim = cfg.optim;
                tc.trades = cfg.trades;
                tc.epochs = cfg.epochs;
                tc.batch_size = cfg.batch_size;
                tc.seed = trial_seed;
                tc.robust_eval_every = cfg.robust_eval_every;
                tc.eval_attack = cfg.eval_attack;
                result = train_adversarial(data.train, data.val, mlp, tc);
                emit_robustness_csv(result.log, (out_dir / (tag + "_robust.csv")).string());
                break;
            }
        }

        emit_epoch_csv(result.log, (out_dir / (tag + ".csv")).string());
        save_targets(result.store, (out_dir / (tag + "_targets.satt")).string());
        save_model(result.model, (out_dir / (tag + "_model.satm")).string());

        TrialOutcome outcome;
        outcome.seed = trial_seed;
        outcome.final = result.log.back();
        outcome.recovered_accuracy =
            recovered_accuracy(result.store.targets, data.train.clean_labels);
        outcome.early_stop = early_stop_select(result.log);
        summary.trials.push_back(outcome);

        json jt;
        jt["seed"] = trial_seed;
        jt["final"] = record_json(outcome.final);
        jt["early_stop"] = {{"epoch", outcome.early_stop.epoch},
                            {"criterion_value", outcome.early_stop.criterion_value},
                            {"clean_val_accuracy", outcome.early_stop.clean_val_accuracy}};
        jt["recovery"] = report_json(
            recovery_report(result.store.targets, data.train.clean_labels));
        jtrials.push_back(jt);
    }

    std::vector<double> clean_accs, noisy_accs, recovered, early_clean;
    for (const TrialOutcome& o : summary.trials) {
        clean_accs.push_back(o.final.acc_clean_val);
        noisy_accs.push_back(o.final.acc_noisy_val);
        recovered.push_back(o.recovered_accuracy);
        early_clean.push_back(o.early_stop.clean_val_accuracy);
    }
    const Stats s_clean = mean_std(clean_accs), s_noisy = mean_std(noisy_accs),
                s_rec = mean_std(recovered), s_early = mean_std(early_clean);

    json summary_json;
    summary_json["config_hash"] = config_hash(cfg);
    {
        json jcfg;
        std::istringstream lines(emit_config(cfg));
        std::string line;
        while (std::getline(lines, line)) {
            const std::size_t eq = line.find('=');
            jcfg[line.substr(0, eq)] = line.substr(eq + 1);
        }
        summary_json["config"] = jcfg;
    }
    summary_json["clean_fraction_mask"] = data.clean_fraction_mask;
    summary_json["clean_fraction_label"] = data.clean_fraction_label;
    summary_json["trials"] = jtrials;
    summary_json["aggregate"] = {
        {"acc_clean_val", {{"mean", s_clean.mean}, {"std", s_clean.stddev}}},
        {"acc_noisy_val", {{"mean", s_noisy.mean}, {"std", s_noisy.stddev}}},
        {"recovered_accuracy", {{"mean", s_rec.mean}, {"std", s_rec.stddev}}},
        {"early_stop_clean_val", {{"mean", s_early.mean}, {"std", s_early.stddev}}},
    };
    {
        std::ofstream sf(out_dir / "summary.json", std::ios::trunc);
        sf << summary_json.dump(2) << "\n";
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep: values must not be empty");
}

std::vector<SweepPointOutcome> sweep(const ExperimentConfig& cfg, const SweepSpec& spec) {
    spec.validate();
    const fs::path root = resolve_output_dir(cfg.output_dir);
    fs::create_directories(root);

    std::vector<SweepPointOutcome> outcomes;
    for (const std::string& value : spec.values) {
        SweepPointOutcome outcome;
        outcome.value = value;
        ExperimentConfig pc = cfg;
        pc.output_dir =
            (fs::path(cfg.output_dir) / (to_string(spec.axis) + "_" + value)).string();
        try {
            switch (spec.axis) {
                case SweepAxis::NoiseRate:
                    pc.corruption.rate = parse_double("sweep value", value);
                    break;
                case SweepAxis::NoiseScheme:
                    pc.corruption.scheme = parse_corruption_scheme(value);
                    break;
                case SweepAxis::Width: {
                    const std::size_t width = parse_u64("sweep value", value);
                    if (pc.hidden.empty()) pc.hidden = {width};
                    for (std::size_t& w : pc.hidden) w = width;
                    if (spec.apply_capacity_rule) {
                        const CapacityParams cap =
                            capacity_sweep_params(width, spec.base_width);
                        pc.sat_start_epoch = cap.start_epoch;
                        pc.sat_alpha = cap.alpha;
                    }
                    break;
                }
                case SweepAxis::Alpha:
                    pc.sat_alpha = parse_double("sweep value", value);
                    break;
                case SweepAxis::StartEpoch:
                    pc.sat_start_epoch = parse_u64("sweep value", value);
                    break;
            }
            outcome.summary = run(pc);
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.ok = false;
            outcome.error = e.what();
        }
        outcomes.push_back(std::move(outcome));
    }

    std::ofstream csv(root / "sweep.csv", std::ios::trunc);
    csv << "axis,value,status,acc_clean_val_mean,acc_clean_val_std,acc_noisy_val_mean,"
           "acc_noisy_val_std,recovered_accuracy_mean,clean_val_error_mean\n";
    for (const SweepPointOutcome& o : outcomes) {
        csv << to_string(spec.axis) << ',' << o.value << ',';
        if (!o.ok) {
            csv << "failed,,,,,,\n";
            continue;
        }
        std::vector<double> clean, noisy, rec;
        for (const TrialOutcome& t : o.summary.trials) {
            clean.push_back(t.final.acc_clean_val);
            noisy.push_back(t.final.acc_noisy_val);
            rec.push_back(t.recovered_accuracy);
        }
        const Stats sc = mean_std(clean), sn = mean_std(noisy), sr = mean_std(rec);
        csv << "ok," << fmt_double(sc.mean) << ',' << fmt_double(sc.stddev) << ','
            << fmt_double(sn.mean) << ',' << fmt_double(sn.stddev) << ','
            << fmt_double(sr.mean) << ',' << fmt_double(1.0 - sc.mean) << "\n";
    }
    return outcomes;
}

// ---------------------------------------------------------------------------
// Model checkpoint, magic "SATM" version 1
// ---------------------------------------------------------------------------

namespace {
constexpr char kModelMagic[4] = {'S', 'A', 'T', 'M'};
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void save_model(const MlpModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
    out.write(kModelMagic, 4);
    out.write(reinterpret_cast<const char*>(&kModelVersion), sizeof(kModelVersion));
    const MlpSpec& spec = model.spec();
    const std::uint64_t input_dim = spec.input_dim;
    const std::uint64_t hidden_count = spec.hidden_widths.size();
    const std::uint64_t classes = spec.num_classes;
    out.write(reinterpret_cast<const char*>(&input_dim), sizeof(input_dim));
    out.write(reinterpret_cast<const char*>(&hidden_count), sizeof(hidden_count));
    for (std::size_t w : spec.hidden_widths) {
        const std::uint64_t width = w;
        out.write(reinterpret_cast<const char*>(&width), sizeof(width));
    }
    out.write(reinterpret_cast<const char*>(&classes), sizeof(classes));
    for (const Tensor& p : model.params())
        out.write(reinterpret_cast<const char*>(p.data().data()),
                  static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (!out) throw std::runtime_error("model checkpoint: write failed: " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
        throw FormatError("model checkpoint: bad magic, expected SATM", 0);
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kModelVersion)
        throw FormatError("model checkpoint: unsupported version", 4);
    std::uint64_t input_dim = 0, hidden_count = 0, classes = 0;
    in.read(reinterpret_cast<char*>(&input_dim), sizeof(input_dim));
    in.read(reinterpret_cast<char*>(&hidden_count), sizeof(hidden_count));
    if (!in) throw FormatError("model checkpoint: truncated header", 8);
    MlpSpec spec;
    spec.input_dim = input_dim;
    for (std::uint64_t i = 0; i < hidden_count; ++i) {
        std::uint64_t w = 0;
        in.read(reinterpret_cast<char*>(&w), sizeof(w));
        spec.hidden_widths.push_back(w);
    }
    in.read(reinterpret_cast<char*>(&classes), sizeof(classes));
    if (!in) throw FormatError("model checkpoint: truncated header", 24);
    spec.num_classes = classes;

    MlpModel model(spec, 0);
    std::size_t offset = 24 + 8 * hidden_count + 8;
    for (Tensor& p : model.params()) {
        in.read(reinterpret_cast<char*>(p.data().data()),
                static_cast<std::streamsize>(p.size() * sizeof(double)));
        if (!in) throw FormatError("model checkpoint: truncated payload", offset);
        offset += p.size() * sizeof(double);
    }
    return model;
}

}  // namespace sat

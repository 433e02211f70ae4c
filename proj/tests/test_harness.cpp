#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "satcore/experiment.hpp"

using namespace sat;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Small enough to train in well under a second.
ExperimentConfig tiny_config(const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.synthetic = {SyntheticGenerator::GaussianBlobs, 3, 120, 6, 4.0, 5};
    cfg.train_count = 300;
    cfg.corruption = {CorruptionScheme::CorruptedLabels, 0.3, 9};
    cfg.hidden = {12};
    cfg.mode = RunMode::Sat;
    cfg.sat_start_epoch = 2;
    cfg.sat_alpha = 0.9;
    cfg.epochs = 5;
    cfg.batch_size = 64;
    cfg.seed = 11;
    cfg.trials = 1;
    cfg.output_dir = out_dir;
    return cfg;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("config text parses and re-emits identically") {
    const std::string text =
        "# comment line\n"
        "dataset.generator = spirals\n"
        "corruption.rate=0.4\n"
        "corruption.scheme = corrupted_labels\n"
        "model.hidden=32,16\n"
        "train.mode=sat_sce\n"
        "train.epochs=42\n";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.synthetic.generator == SyntheticGenerator::Spirals);
    CHECK(cfg.corruption.rate == 0.4);
    CHECK(cfg.hidden == std::vector<std::size_t>{32, 16});
    CHECK(cfg.mode == RunMode::SatSce);
    CHECK(cfg.epochs == 42);

    const std::string canonical = emit_config(cfg);
    const ExperimentConfig reparsed = parse_config_text(canonical);
    CHECK(emit_config(reparsed) == canonical);
    CHECK(config_hash(reparsed) == config_hash(cfg));
}

TEST_CASE("unknown keys and malformed lines are rejected by name") {
    ExperimentConfig cfg;
    try {
        apply_config_entry(cfg, "optim.lr1", "0.5");
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("optim.lr1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("no equals sign here\n"), std::invalid_argument);
    CHECK_THROWS_AS(apply_config_entry(cfg, "train.epochs", "twelve"),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_config_entry(cfg, "corruption.scheme", "sparkle"),
                    std::invalid_argument);
}

TEST_CASE("the augmentation stub is rejected as unimplemented") {
    ExperimentConfig cfg = tiny_config("unused");
    cfg.augment = true;
    CHECK_THROWS_WITH_AS(cfg.validate(),
                         "augment.enabled: data augmentation is not implemented",
                         std::invalid_argument);
}

TEST_CASE("mode defaults resolve E_s and alpha") {
    ExperimentConfig cfg;
    cfg.mode = RunMode::Sat;
    CHECK(cfg.sat_config().start_epoch == 60);
    CHECK(cfg.sat_config().alpha == 0.9);
    cfg.mode = RunMode::Selective;
    CHECK(cfg.sat_config().start_epoch == 0);
    CHECK(cfg.sat_config().alpha == 0.99);
    cfg.mode = RunMode::TradesSat;
    CHECK(cfg.sat_config().start_epoch == 70);
    CHECK(cfg.sat_config().alpha == 0.9);
    cfg.sat_alpha = 0.5;
    CHECK(cfg.sat_config().alpha == 0.5);
}

TEST_CASE("repeated runs are byte-identical") {
    // Different output dirs: every artifact except the config echo matches.
    const fs::path dir_a = fresh_dir("satlab_run_det_a");
    const fs::path dir_b = fresh_dir("satlab_run_det_b");
    run(tiny_config(dir_a.string()));
    run(tiny_config(dir_b.string()));
    CHECK(slurp(dir_a / "trial_0.csv") == slurp(dir_b / "trial_0.csv"));
    CHECK(slurp(dir_a / "trial_0_targets.satt") == slurp(dir_b / "trial_0_targets.satt"));
    CHECK(slurp(dir_a / "trial_0_model.satm") == slurp(dir_b / "trial_0_model.satm"));

    // Identical config (same dir): the summary reproduces byte-for-byte too.
    const std::string first_summary = slurp(dir_a / "summary.json");
    run(tiny_config(dir_a.string()));
    CHECK(slurp(dir_a / "summary.json") == first_summary);
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("three trials emit three CSVs and an aggregate summary") {
    const fs::path dir = fresh_dir("satlab_run_trials");
    ExperimentConfig cfg = tiny_config(dir.string());
    cfg.trials = 3;
    const RunSummary summary = run(cfg);
    CHECK(summary.trials.size() == 3);
    CHECK(fs::exists(dir / "trial_0.csv"));
    CHECK(fs::exists(dir / "trial_1.csv"));
    CHECK(fs::exists(dir / "trial_2.csv"));
    CHECK(fs::exists(dir / "summary.json"));
    // per-trial seeds derive as seed + index
    CHECK(summary.trials[0].seed == 11);
    CHECK(summary.trials[1].seed == 12);
    CHECK(summary.trials[2].seed == 13);
    const std::string js = slurp(dir / "summary.json");
    CHECK(js.find("\"aggregate\"") != std::string::npos);
    CHECK(js.find("\"std\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("sat with alpha=1 reproduces the erm run byte-for-byte") {
    const fs::path dir_sat = fresh_dir("satlab_run_alpha1");
    const fs::path dir_erm = fresh_dir("satlab_run_erm");
    ExperimentConfig cfg_sat = tiny_config(dir_sat.string());
    cfg_sat.sat_alpha = 1.0;
    run(cfg_sat);
    ExperimentConfig cfg_erm = tiny_config(dir_erm.string());
    cfg_erm.mode = RunMode::Erm;
    run(cfg_erm);
    CHECK(slurp(dir_sat / "trial_0.csv") == slurp(dir_erm / "trial_0.csv"));
    fs::remove_all(dir_sat);
    fs::remove_all(dir_erm);
}

TEST_CASE("rerunning from the embedded resolved config reproduces the run") {
    const fs::path dir = fresh_dir("satlab_run_roundtrip");
    run(tiny_config(dir.string()));
    ExperimentConfig cfg = parse_config_file((dir / "config.resolved.txt").string());
    const fs::path dir2 = fresh_dir("satlab_run_roundtrip2");
    cfg.output_dir = dir2.string();
    run(cfg);
    CHECK(slurp(dir / "trial_0.csv") == slurp(dir2 / "trial_0.csv"));
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("a singleton sweep matches the equivalent plain run") {
    const fs::path dir_sweep = fresh_dir("satlab_sweep_single");
    const fs::path dir_run = fresh_dir("satlab_run_single");

    ExperimentConfig base = tiny_config(dir_sweep.string());
    SweepSpec spec;
    spec.axis = SweepAxis::NoiseRate;
    spec.values = {"0.3"};
    const auto outcomes = sweep(base, spec);
    REQUIRE(outcomes.size() == 1);
    CHECK(outcomes[0].ok);

    ExperimentConfig plain = tiny_config(dir_run.string());
    plain.corruption.rate = 0.3;
    run(plain);
    CHECK(slurp(dir_sweep / "noise_rate_0.3" / "trial_0.csv") ==
          slurp(dir_run / "trial_0.csv"));
    CHECK(fs::exists(dir_sweep / "sweep.csv"));
    fs::remove_all(dir_sweep);
    fs::remove_all(dir_run);
}

TEST_CASE("a failing grid point is recorded and the sweep continues") {
    const fs::path dir = fresh_dir("satlab_sweep_fail");
    ExperimentConfig base = tiny_config(dir.string());
    SweepSpec spec;
    spec.axis = SweepAxis::Alpha;
    spec.values = {"0.5", "2.0", "0.9"};  // 2.0 violates alpha in [0, 1]
    const auto outcomes = sweep(base, spec);
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].ok);
    CHECK(!outcomes[1].ok);
    CHECK(!outcomes[1].error.empty());
    CHECK(outcomes[2].ok);
    // siblings unharmed
    CHECK(fs::exists(dir / "alpha_0.5" / "trial_0.csv"));
    CHECK(fs::exists(dir / "alpha_0.9" / "trial_0.csv"));
    const std::string csv = slurp(dir / "sweep.csv");
    CHECK(csv.find("failed") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("width sweep applies the capacity rule per point") {
    const fs::path dir = fresh_dir("satlab_sweep_width");
    ExperimentConfig base = tiny_config(dir.string());
    base.epochs = 2;
    SweepSpec spec;
    spec.axis = SweepAxis::Width;
    spec.values = {"32", "128"};
    const auto outcomes = sweep(base, spec);
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0].ok);
    CHECK(outcomes[1].ok);
    const ExperimentConfig c32 =
        parse_config_file((dir / "width_32" / "config.resolved.txt").string());
    CHECK(c32.hidden == std::vector<std::size_t>{32});
    CHECK(*c32.sat_start_epoch == 80);
    CHECK(*c32.sat_alpha == doctest::Approx(std::sqrt(0.9)).epsilon(1e-12));
    const ExperimentConfig c128 =
        parse_config_file((dir / "width_128" / "config.resolved.txt").string());
    CHECK(*c128.sat_start_epoch == 20);
    CHECK(*c128.sat_alpha == doctest::Approx(0.81).epsilon(1e-12));
    fs::remove_all(dir);
}

TEST_CASE("model checkpoints round-trip through SATM") {
    MlpModel model(MlpSpec{7, {5, 4}, 3}, 99);
    const fs::path path = fs::temp_directory_path() / "satlab_model.satm";
    save_model(model, path.string());
    const MlpModel back = load_model(path.string());
    CHECK(back.params_equal(model));
    CHECK(back.spec().input_dim == 7);
    CHECK(back.spec().hidden_widths == std::vector<std::size_t>{5, 4});
    CHECK(back.spec().num_classes == 3);
    fs::remove(path);
}

TEST_CASE("relative output dirs resolve under SAT_OUTPUT_ROOT") {
    const fs::path root = fresh_dir("satlab_output_root");
    fs::create_directories(root);
    setenv("SAT_OUTPUT_ROOT", root.c_str(), 1);
    ExperimentConfig cfg = tiny_config("nested/run");
    const RunSummary summary = run(cfg);
    unsetenv("SAT_OUTPUT_ROOT");
    CHECK(fs::exists(root / "nested/run" / "trial_0.csv"));
    CHECK(summary.run_dir == (root / "nested/run").string());
    fs::remove_all(root);
}

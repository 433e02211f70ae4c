#include <benchmark/benchmark.h>

#include "satcore/adversarial.hpp"
#include "satcore/corruption.hpp"
#include "satcore/dataset.hpp"
#include "satcore/sat.hpp"

using namespace sat;

namespace {

LabeledDataset bench_data(std::size_t per_class, std::size_t dim) {
    return corrupt(
        gen_synthetic({SyntheticGenerator::GaussianBlobs, 10, per_class, dim, 4.0, 1}),
        {CorruptionScheme::CorruptedLabels, 0.4, 2});
}

void BM_TrainEpoch(benchmark::State& state) {
    LabeledDataset full = bench_data(220, 32);
    auto [train_ds, val_ds] = split_train_val(full, 2000);
    MlpSpec mlp{32, {128, 128}, 10};
    TrainConfig cfg;
    cfg.mode = SatTrainMode::Sat;
    cfg.sat = {0, 0.9};  // updates from the first epoch: worst-case cost
    cfg.epochs = 1;
    cfg.batch_size = 256;
    for (auto _ : state) {
        TrainResult r = train(train_ds, val_ds, mlp, cfg);
        benchmark::DoNotOptimize(r.log.data());
    }
    state.SetItemsProcessed(state.iterations() * train_ds.size());
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_PgdAttackBatch(benchmark::State& state) {
    const std::size_t steps = static_cast<std::size_t>(state.range(0));
    LabeledDataset full = bench_data(60, 32);
    // squash into the unit box so default pixel bounds apply
    double lo = full.inputs[0], hi = full.inputs[0];
    for (double v : full.inputs.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double& v : full.inputs.data()) v = (v - lo) / (hi - lo);
    MlpModel model(MlpSpec{32, {128, 128}, 10}, 3);
    const AttackSpec spec{0.031, 0.007, steps, 0.0, 1.0};
    Tensor batch(256, 32);
    std::vector<std::uint32_t> labels(256);
    for (std::size_t i = 0; i < 256; ++i) {
        for (std::size_t j = 0; j < 32; ++j) batch.at(i, j) = full.inputs.at(i, j);
        labels[i] = full.clean_labels[i];
    }
    for (auto _ : state) {
        Tensor adv = pgd_attack(model, batch, labels, spec,
                                AttackObjective::CeWrtLabel, 17);
        benchmark::DoNotOptimize(adv.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_PgdAttackBatch)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

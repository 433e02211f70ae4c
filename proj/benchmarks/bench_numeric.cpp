#include <benchmark/benchmark.h>

#include "satcore/mlp.hpp"
#include "satcore/rng.hpp"
#include "satcore/sat.hpp"
#include "satcore/tensor.hpp"

using namespace sat;

namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Tensor m(rows, cols);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

void BM_Matmul(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Tensor a = random_matrix(n, n, 1);
    const Tensor b = random_matrix(n, n, 2);
    for (auto _ : state) {
        Tensor c = matmul(a, b);
        benchmark::DoNotOptimize(c.data().data());
    }
    state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_ForwardBackward(benchmark::State& state) {
    const std::size_t batch = static_cast<std::size_t>(state.range(0));
    MlpSpec spec{32, {128, 128}, 10};
    MlpModel model(spec, 3);
    Rng rng(4);
    Tensor x(batch, 32);
    for (double& v : x.data()) v = rng.normal();
    Tensor dlogits(batch, 10);
    for (double& v : dlogits.data()) v = rng.normal() / static_cast<double>(batch);
    for (auto _ : state) {
        ForwardCache cache;
        model.forward(x, cache);
        std::vector<Tensor> grads = model.zero_grads();
        model.backward(cache, dlogits, grads);
        benchmark::DoNotOptimize(grads.data());
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ForwardBackward)->Arg(64)->Arg(256);

void BM_Softmax(benchmark::State& state) {
    const Tensor logits = random_matrix(256, 10, 5);
    for (auto _ : state) {
        Tensor p = softmax(logits);
        benchmark::DoNotOptimize(p.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_Softmax);

void BM_SatLossGrad(benchmark::State& state) {
    Rng rng(6);
    const Tensor logits = random_matrix(256, 10, 7);
    const Tensor probs = softmax(logits);
    Tensor targets(256, 10);
    std::vector<double> weights(256);
    for (std::size_t i = 0; i < 256; ++i) {
        targets.at(i, rng.uniform_index(10)) = 1.0;
        weights[i] = 1.0;
    }
    for (auto _ : state) {
        LossValueGrad lg = sat_loss_grad(probs, targets, weights);
        benchmark::DoNotOptimize(lg.dlogits.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_SatLossGrad);

void BM_EmaUpdate(benchmark::State& state) {
    Rng rng(8);
    std::vector<double> t(10, 0.1);
    std::vector<double> p(10);
    double sum = 0.0;
    for (double& v : p) {
        v = rng.uniform();
        sum += v;
    }
    for (double& v : p) v /= sum;
    for (auto _ : state) {
        ema_update_inplace(t, p, 0.9);
        benchmark::DoNotOptimize(t.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EmaUpdate);

}  // namespace

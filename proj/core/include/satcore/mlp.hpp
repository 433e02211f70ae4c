#pragma once

#include <cstdint>
#include <vector>

#include "satcore/tensor.hpp"

namespace sat {

enum class Activation { Relu };

/// Architecture of a fully connected ReLU classifier.
struct MlpSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_widths;
    std::size_t num_classes = 2;
    Activation activation = Activation::Relu;

    void validate() const;
};

/// Activations recorded during a forward pass, consumed by backward().
struct ForwardCache {
    std::vector<Tensor> acts;  // acts[0] = input, acts[l] = post-ReLU of layer l
    Tensor logits;
};

/// MLP parameters. Layout: W0, b0, W1, b1, ... with W [fan_in x fan_out].
/// Fully determined by (spec, seed).
class MlpModel {
public:
    MlpModel() = default;
    MlpModel(MlpSpec spec, std::uint64_t seed);

    const MlpSpec& spec() const noexcept { return spec_; }
    std::size_t num_layers() const noexcept { return spec_.hidden_widths.size() + 1; }
    std::size_t output_dim() const noexcept { return spec_.num_classes; }

    std::vector<Tensor>& params() noexcept { return params_; }
    const std::vector<Tensor>& params() const noexcept { return params_; }

    /// Logits for a [batch x input_dim] input. Deterministic.
    Tensor forward(const Tensor& x) const;
    /// Forward pass that records activations for backward().
    const Tensor& forward(const Tensor& x, ForwardCache& cache) const;

    /// Parameter gradients from d(loss)/d(logits). When dx is non-null, also
    /// the gradient w.r.t. the input (used by the attack module).
    /// Gradients are accumulated into `grads`, which must be zero-initialized
    /// or hold partial sums of the same shapes.
    void backward(const ForwardCache& cache, const Tensor& dlogits,
                  std::vector<Tensor>& grads, Tensor* dx = nullptr) const;

    /// Input gradient only; skips the parameter gradients. Attack hot path.
    Tensor backward_input(const ForwardCache& cache, const Tensor& dlogits) const;

    std::vector<Tensor> zero_grads() const;

    bool params_equal(const MlpModel& other) const;

private:
    MlpSpec spec_;
    std::vector<Tensor> params_;
};

/// Row-wise softmax with max subtraction. Rejects non-finite input.
Tensor softmax(const Tensor& logits);

/// A scalar training objective over a fixed batch: the piece `grad` and the
/// finite-difference oracle both consume.
class ModelObjective {
public:
    virtual ~ModelObjective() = default;
    virtual double value(const MlpModel& model) const = 0;
    virtual std::vector<Tensor> gradients(const MlpModel& model) const = 0;
};

/// Central-difference check of an objective's analytic gradient on a sampled
/// subset of parameters. Returns the worst relative discrepancy, where
/// rel = |analytic - fd| / max(|analytic| + |fd|, 1e-6).
double finite_diff_check(const MlpModel& model, const ModelObjective& objective,
                         double h = 1e-5, std::size_t max_samples = 200,
                         std::uint64_t seed = 12345);

std::size_t argmax_row(std::span<const double> row);

}  // namespace sat

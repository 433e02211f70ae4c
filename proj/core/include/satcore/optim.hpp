#pragma once

#include <cstddef>
#include <vector>

#include "satcore/mlp.hpp"
#include "satcore/tensor.hpp"

namespace sat {

struct SgdHyper {
    double lr0 = 0.1;
    double momentum = 0.9;
    double weight_decay = 0.0005;

    void validate() const;
};

/// Heavy-ball SGD state. Buffer shapes mirror the model's parameter shapes.
struct OptimizerState {
    std::vector<Tensor> momentum_buffers;
    SgdHyper hyper;
    std::size_t epoch_budget = 1;
};

OptimizerState make_optimizer(const MlpModel& model, const SgdHyper& hyper,
                              std::size_t epoch_budget);

/// v <- momentum * v + g + weight_decay * theta;  theta <- theta - lr * v
void sgd_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
              OptimizerState& state, double lr);

/// 0.5 * lr0 * (1 + cos(pi * e / total)). Anneals to zero at e == total.
double cosine_lr(std::size_t epoch, std::size_t total, double lr0);

}  // namespace sat

#include "satcore/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sat {

void SgdHyper::validate() const {
    if (!(lr0 > 0.0)) throw std::invalid_argument("sgd: lr0 must be > 0");
    if (momentum < 0.0 || momentum >= 1.0)
        throw std::invalid_argument("sgd: momentum must be in [0, 1)");
    if (weight_decay < 0.0) throw std::invalid_argument("sgd: weight_decay must be >= 0");
}

OptimizerState make_optimizer(const MlpModel& model, const SgdHyper& hyper,
                              std::size_t epoch_budget) {
    hyper.validate();
    if (epoch_budget < 1) throw std::invalid_argument("sgd: epoch budget must be >= 1");
    OptimizerState state;
    state.hyper = hyper;
    state.epoch_budget = epoch_budget;
    state.momentum_buffers.reserve(model.params().size());
    for (const Tensor& p : model.params()) state.momentum_buffers.emplace_back(p.shape());
    return state;
}

void sgd_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
              OptimizerState& state, double lr) {
    if (lr < 0.0) throw std::invalid_argument("sgd: lr must be >= 0");
    if (params.size() != grads.size() || params.size() != state.momentum_buffers.size())
        throw std::invalid_argument("sgd: parameter/gradient/buffer count mismatch");
    const double m = state.hyper.momentum;
    const double wd = state.hyper.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& theta = params[i];
        const Tensor& g = grads[i];
        Tensor& v = state.momentum_buffers[i];
        if (!theta.same_shape(g) || !theta.same_shape(v))
            throw std::invalid_argument("sgd: shape mismatch");
        double* pt = theta.data().data();
        const double* pg = g.data().data();
        double* pv = v.data().data();
        for (std::size_t k = 0; k < theta.size(); ++k) {
            pv[k] = m * pv[k] + pg[k] + wd * pt[k];
            pt[k] -= lr * pv[k];
        }
    }
}

double cosine_lr(std::size_t epoch, std::size_t total, double lr0) {
    if (total < 1) throw std::invalid_argument("cosine_lr: total must be >= 1");
    if (epoch > total) throw std::invalid_argument("cosine_lr: epoch exceeds total");
    const double frac = static_cast<double>(epoch) / static_cast<double>(total);
    return 0.5 * lr0 * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace sat

#include "satcore/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "satcore/rng.hpp"

namespace sat {

void MlpSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("mlp: input_dim must be >= 1");
    if (num_classes < 2) throw std::invalid_argument("mlp: num_classes must be >= 2");
    for (std::size_t w : hidden_widths)
        if (w < 1) throw std::invalid_argument("mlp: hidden widths must be >= 1");
}

MlpModel::MlpModel(MlpSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    spec_.validate();
    Rng rng(seed);
    std::size_t fan_in = spec_.input_dim;
    std::vector<std::size_t> widths = spec_.hidden_widths;
    widths.push_back(spec_.num_classes);
    for (std::size_t w : widths) {
        Tensor weight(fan_in, w);
        const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));  // He init
        for (double& v : weight.data()) v = rng.normal(0.0, std_dev);
        params_.push_back(std::move(weight));
        params_.emplace_back(std::vector<std::size_t>{1, w});  // bias, zero
        fan_in = w;
    }
}

namespace {

void add_bias_rows(Tensor& m, const Tensor& bias) {
    const std::size_t rows = m.rows(), cols = m.cols();
    const double* b = bias.data().data();
    double* p = m.data().data();
    for (std::size_t i = 0; i < rows; ++i, p += cols)
        for (std::size_t j = 0; j < cols; ++j) p[j] += b[j];
}

void relu_inplace(Tensor& m) {
    for (double& v : m.data())
        if (v < 0.0) v = 0.0;
}

}  // namespace

Tensor MlpModel::forward(const Tensor& x) const {
    if (x.ndim() != 2 || x.cols() != spec_.input_dim)
        throw std::invalid_argument("mlp: input shape does not match input_dim");
    const std::size_t layers = num_layers();
    Tensor a;
    for (std::size_t l = 0; l < layers; ++l) {
        Tensor z = matmul(l == 0 ? x : a, params_[2 * l]);
        add_bias_rows(z, params_[2 * l + 1]);
        if (l + 1 < layers) relu_inplace(z);
        a = std::move(z);
    }
    return a;
}

const Tensor& MlpModel::forward(const Tensor& x, ForwardCache& cache) const {
    if (x.ndim() != 2 || x.cols() != spec_.input_dim)
        throw std::invalid_argument("mlp: input shape does not match input_dim");
    const std::size_t layers = num_layers();
    cache.acts.clear();
    cache.acts.reserve(layers);
    cache.acts.push_back(x);
    for (std::size_t l = 0; l < layers; ++l) {
        Tensor z = matmul(cache.acts.back(), params_[2 * l]);
        add_bias_rows(z, params_[2 * l + 1]);
        if (l + 1 < layers) {
            relu_inplace(z);
            cache.acts.push_back(std::move(z));
        } else {
            cache.logits = std::move(z);
        }
    }
    return cache.logits;
}

void MlpModel::backward(const ForwardCache& cache, const Tensor& dlogits,
                        std::vector<Tensor>& grads, Tensor* dx) const {
    if (grads.size() != params_.size())
        throw std::invalid_argument("mlp: gradient container shape mismatch");
    const std::size_t layers = num_layers();
    Tensor g = dlogits;
    for (std::size_t l = layers; l-- > 0;) {
        const Tensor& a_in = cache.acts[l];
        // dW = a_in^T g, db = column sums of g
        {
            Tensor dw = matmul_tn(a_in, g);
            axpy(1.0, dw, grads[2 * l]);
            Tensor& db = grads[2 * l + 1];
            const std::size_t rows = g.rows(), cols = g.cols();
            const double* p = g.data().data();
            for (std::size_t i = 0; i < rows; ++i, p += cols)
                for (std::size_t j = 0; j < cols; ++j) db[j] += p[j];
        }
        if (l > 0) {
            Tensor da = matmul_nt(g, params_[2 * l]);
            // ReLU mask: derivative 1 where the activation is positive
            const double* a = a_in.data().data();
            double* d = da.data().data();
            for (std::size_t i = 0; i < da.size(); ++i)
                if (a[i] <= 0.0) d[i] = 0.0;
            g = std::move(da);
        } else if (dx != nullptr) {
            *dx = matmul_nt(g, params_[0]);
        }
    }
}

Tensor MlpModel::backward_input(const ForwardCache& cache, const Tensor& dlogits) const {
    const std::size_t layers = num_layers();
    Tensor g = dlogits;
    for (std::size_t l = layers; l-- > 0;) {
        Tensor da = matmul_nt(g, params_[2 * l]);
        if (l > 0) {
            const double* a = cache.acts[l].data().data();
            double* dv = da.data().data();
            for (std::size_t i = 0; i < da.size(); ++i)
                if (a[i] <= 0.0) dv[i] = 0.0;
        }
        g = std::move(da);
    }
    return g;
}

std::vector<Tensor> MlpModel::zero_grads() const {
    std::vector<Tensor> grads;
    grads.reserve(params_.size());
    for (const Tensor& p : params_) grads.emplace_back(p.shape());
    return grads;
}

bool MlpModel::params_equal(const MlpModel& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (!(params_[i] == other.params_[i])) return false;
    return true;
}

Tensor softmax(const Tensor& logits) {
    if (!logits.all_finite())
        throw std::invalid_argument("softmax: non-finite input");
    const std::size_t rows = logits.rows(), cols = logits.cols();
    Tensor probs(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        auto in = logits.row(i);
        auto out = probs.row(i);
        double mx = in[0];
        for (std::size_t j = 1; j < cols; ++j)
            if (in[j] > mx) mx = in[j];
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            out[j] = std::exp(in[j] - mx);
            sum += out[j];
        }
        for (std::size_t j = 0; j < cols; ++j) out[j] /= sum;
    }
    return probs;
}

double finite_diff_check(const MlpModel& model, const ModelObjective& objective,
                         double h, std::size_t max_samples, std::uint64_t seed) {
    if (h <= 0.0) throw std::invalid_argument("finite_diff_check: h must be > 0");
    const std::vector<Tensor> analytic = objective.gradients(model);

    std::size_t total = 0;
    for (const Tensor& t : model.params()) total += t.size();

    // Deterministic sample of parameter coordinates.
    std::vector<std::size_t> coords;
    if (total <= max_samples) {
        coords.resize(total);
        for (std::size_t i = 0; i < total; ++i) coords[i] = i;
    } else {
        Rng rng(seed);
        coords.reserve(max_samples);
        for (std::size_t i = 0; i < max_samples; ++i)
            coords.push_back(static_cast<std::size_t>(rng.uniform_index(total)));
    }

    MlpModel probe = model;
    double worst = 0.0;
    for (std::size_t flat : coords) {
        std::size_t pi = 0, off = flat;
        while (off >= probe.params()[pi].size()) {
            off -= probe.params()[pi].size();
            ++pi;
        }
        double& slot = probe.params()[pi][off];
        const double saved = slot;
        slot = saved + h;
        const double up = objective.value(probe);
        slot = saved - h;
        const double down = objective.value(probe);
        slot = saved;

        const double fd = (up - down) / (2.0 * h);
        const double an = analytic[pi][off];
        const double rel = std::abs(an - fd) / std::max(std::abs(an) + std::abs(fd), 1e-6);
        if (rel > worst) worst = rel;
    }
    return worst;
}

std::size_t argmax_row(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;  // ties keep the lowest index
    return best;
}

}  // namespace sat

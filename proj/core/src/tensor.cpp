#include "satcore/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace sat {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
    cols_cache_ = shape_.size() == 2 ? shape_[1] : 0;
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size())
        throw std::invalid_argument("tensor: shape does not match data length");
    cols_cache_ = shape_.size() == 2 ? shape_[1] : 0;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<double> values) {
    return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
    if (shape_.size() != 2) throw std::invalid_argument("tensor: rows() needs a 2-d tensor");
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (shape_.size() != 2) throw std::invalid_argument("tensor: cols() needs a 2-d tensor");
    return shape_[1];
}

std::span<double> Tensor::row(std::size_t r) {
    return {data_.data() + r * cols_cache_, cols_cache_};
}

std::span<const double> Tensor::row(std::size_t r) const {
    return {data_.data() + r * cols_cache_, cols_cache_};
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) throw std::invalid_argument("matmul: inner dimensions differ");
    Tensor c(m, n);
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* pc = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = pa + i * k;
        double* ci = pc + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            const double* bp = pb + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
    return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
    if (b.rows() != k) throw std::invalid_argument("matmul_tn: inner dimensions differ");
    Tensor c(m, n);
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* pc = c.data().data();
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = pa + p * m;
        const double* bp = pb + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = ap[i];
            if (av == 0.0) continue;
            double* ci = pc + i * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
    return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    if (b.cols() != k) throw std::invalid_argument("matmul_nt: inner dimensions differ");
    Tensor c(m, n);
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* pc = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = pa + i * k;
        double* ci = pc + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = pb + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] += acc;
        }
    }
    return c;
}

void axpy(double alpha, const Tensor& x, Tensor& y) {
    if (!x.same_shape(y)) throw std::invalid_argument("axpy: shape mismatch");
    double* py = y.data().data();
    const double* px = x.data().data();
    for (std::size_t i = 0; i < x.size(); ++i) py[i] += alpha * px[i];
}

}  // namespace sat

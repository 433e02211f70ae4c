#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sat {

/// Dense row-major tensor of doubles. The carrier for inputs, logits,
/// probabilities and gradients throughout the library.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);
    Tensor(std::size_t rows, std::size_t cols)
        : Tensor(std::vector<std::size_t>{rows, cols}) {}

    static Tensor matrix(std::size_t rows, std::size_t cols,
                         std::initializer_list<double> values);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t ndim() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t rows() const;
    std::size_t cols() const;

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols_cache_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_cache_ + c]; }

    std::span<double> row(std::size_t r);
    std::span<const double> row(std::size_t r) const;

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    void fill(double v);
    bool all_finite() const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
    std::size_t cols_cache_ = 0;  // cols() for 2-d access, 0 otherwise
};

/// C = A * B for 2-d tensors, [m x k] * [k x n] -> [m x n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// C = A^T * B, A [k x m], B [k x n] -> [m x n]. Backprop helper.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// C = A * B^T, A [m x k], B [n x k] -> [m x n]. Backprop helper.
Tensor matmul_nt(const Tensor& a, const Tensor& b);

void axpy(double alpha, const Tensor& x, Tensor& y);  // y += alpha * x

}  // namespace sat

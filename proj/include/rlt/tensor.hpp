#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlt {

// Row-major dense tensor of doubles. Rank 1 or 2 in practice.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;

    Tensor(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (size_from_shape() != data.size())
            throw std::invalid_argument("tensor: shape/data size mismatch");
    }

    static Tensor zeros(std::vector<std::size_t> s) {
        std::size_t n = 1;
        for (auto v : s) n *= v;
        return Tensor(std::move(s), std::vector<double>(n, 0.0));
    }

    static Tensor vector(std::vector<double> d) {
        std::size_t n = d.size();
        return Tensor({n}, std::move(d));
    }

    static Tensor matrix(std::size_t r, std::size_t c, std::vector<double> d) {
        return Tensor({r, c}, std::move(d));
    }

    std::size_t size_from_shape() const {
        std::size_t n = 1;
        for (auto v : shape) n *= v;
        return n;
    }

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }

    std::size_t rows() const { return rank() == 2 ? shape[0] : 1; }
    std::size_t cols() const { return rank() == 2 ? shape[1] : shape.empty() ? 0 : shape[0]; }

    double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

// out = a (r x k) * b (k x c)
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    const std::size_t r = a.rows(), k = a.cols(), c = b.cols();
    if (b.rows() != k) throw std::invalid_argument("matmul: inner dim mismatch");
    Tensor out = Tensor::zeros({r, c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a.data[i * k + p];
            if (av == 0.0) continue;
            const double* brow = &b.data[p * c];
            double* orow = &out.data[i * c];
            for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
        }
    return out;
}

// out = a^T (k x r -> r x k transposed) * b : (a.cols x b.cols)
inline Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    const std::size_t k = a.rows(), r = a.cols(), c = b.cols();
    if (b.rows() != k) throw std::invalid_argument("matmul_tn: inner dim mismatch");
    Tensor out = Tensor::zeros({r, c});
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t i = 0; i < r; ++i) {
            const double av = a.data[p * r + i];
            if (av == 0.0) continue;
            const double* brow = &b.data[p * c];
            double* orow = &out.data[i * c];
            for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
        }
    return out;
}

// out = a * b^T : (a.rows x b.rows)
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    const std::size_t r = a.rows(), k = a.cols(), c = b.rows();
    if (b.cols() != k) throw std::invalid_argument("matmul_nt: inner dim mismatch");
    Tensor out = Tensor::zeros({r, c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            double s = 0.0;
            const double* arow = &a.data[i * k];
            const double* brow = &b.data[j * k];
            for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            out.data[i * c + j] = s;
        }
    return out;
}

inline void add_row_inplace(Tensor& m, const Tensor& row) {
    const std::size_t r = m.rows(), c = m.cols();
    if (row.size() != c) throw std::invalid_argument("add_row: width mismatch");
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m.data[i * c + j] += row.data[j];
}

inline void axpy(Tensor& y, double a, const Tensor& x) {
    if (!y.same_shape(x)) throw std::invalid_argument("axpy: shape mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += a * x.data[i];
}

}  // namespace rlt

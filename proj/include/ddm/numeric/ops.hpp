#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>

#include "ddm/error.hpp"
#include "ddm/numeric/matrix.hpp"

namespace ddm::numeric {

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: cannot multiply " + a.shape_string() + " by " +
                         b.shape_string());
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

/// y = A x
inline Vector matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        throw ShapeError("matvec: matrix " + a.shape_string() + " with vector of length " +
                         std::to_string(x.size()));
    }
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

/// y = Aᵀ x
inline Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
    if (a.rows() != x.size()) {
        throw ShapeError("matvec_transposed: matrix " + a.shape_string() +
                         " with vector of length " + std::to_string(x.size()));
    }
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) y[j] += xi * r[j];
    }
    return y;
}

/// A += alpha * u vᵀ
inline void add_outer(Matrix& a, double alpha, std::span<const double> u,
                      std::span<const double> v) {
    if (a.rows() != u.size() || a.cols() != v.size()) {
        throw ShapeError("add_outer: matrix " + a.shape_string() + " with vectors of length " +
                         std::to_string(u.size()) + " and " + std::to_string(v.size()));
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double s = alpha * u[i];
        if (s == 0.0) continue;
        auto r = a.row(i);
        for (std::size_t j = 0; j < v.size(); ++j) r[j] += s * v[j];
    }
}

inline double sigmoid(double x) noexcept {
    // Branching on sign keeps exp() from overflowing for large |x|.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline Vector sigmoid(std::span<const double> x) {
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
    return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ShapeError("dot: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> a) noexcept {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

inline double norm(std::span<const double> a) noexcept { return std::sqrt(squared_norm(a)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ShapeError("distance: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

/// params <- params - lr * grads. Nothing is written unless every gradient is finite.
inline void sgd_step(std::span<double> params, std::span<const double> grads, double lr,
                     std::string_view block = "params") {
    if (params.size() != grads.size()) {
        throw ShapeError("sgd_step: block '" + std::string(block) + "' has " +
                         std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    }
    if (!(lr > 0.0)) throw ConfigError("sgd_step: learning rate must be positive");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw NumericError("sgd_step: non-finite gradient in block '" + std::string(block) +
                               "' at index " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

} // namespace ddm::numeric

#pragma once

#include <cmath>
#include <optional>
#include <span>

#include "ddm/error.hpp"
#include "ddm/numeric/matrix.hpp"

namespace ddm::numeric {

/// Solves A x = b for symmetric positive definite A by Cholesky factorization.
/// Returns nullopt when a pivot falls below `min_pivot` times the largest diagonal entry.
inline std::optional<Vector> cholesky_solve(const Matrix& a, std::span<const double> b,
                                            double min_pivot = 1e-12) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n)
        throw ShapeError("cholesky_solve: matrix " + a.shape_string() + " with rhs of length " +
                         std::to_string(b.size()));
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, a(i, i));
    if (n == 0) return Vector{};
    if (!(scale > 0.0)) return std::nullopt;

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > min_pivot * scale)) return std::nullopt;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    Vector x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

} // namespace ddm::numeric

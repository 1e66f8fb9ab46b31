#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/numeric/linalg.hpp"
#include "ddm/numeric/matrix.hpp"
#include "ddm/numeric/ops.hpp"

namespace ddm::scsp {

using numeric::Matrix;
using numeric::Vector;

struct LassoOptions {
    std::size_t max_sweeps = 10000;
    double tolerance = 1e-8; ///< stop when the largest coefficient change in a full sweep is below
    double kkt_tolerance = 1e-6;
};

struct LassoResult {
    Vector coefficients;
    std::size_t sweeps = 0;       ///< full passes over every coordinate
    std::size_t inner_sweeps = 0; ///< passes restricted to the active set
    double kkt_violation = 0.0;
};

inline double soft_threshold(double z, double lambda) noexcept {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

/// Largest violation of the lasso optimality conditions, given the correlations
/// g = Dᵀ(x - Dβ). Masked coordinates are pinned to zero and ignored.
inline double kkt_violation(std::span<const double> beta, std::span<const double> g,
                            double lambda, std::span<const std::uint8_t> masked = {}) {
    double worst = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        if (!masked.empty() && masked[j]) continue;
        double v;
        if (beta[j] > 0.0) v = std::abs(g[j] - lambda);
        else if (beta[j] < 0.0) v = std::abs(g[j] + lambda);
        else v = std::max(0.0, std::abs(g[j]) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

/// Cyclic coordinate descent for min ½‖x − Dβ‖² + λ‖β‖₁ in covariance form.
///
/// gram = DᵀD (N x N), corr = Dᵀx. Each full sweep is followed by a direct solve on the
/// support it found (active-set sweeps when that block is singular). Stops once a full
/// sweep changes no coefficient by more than the tolerance.
inline LassoResult lasso_gram(const Matrix& gram, std::span<const double> corr, double lambda,
                              const LassoOptions& opts = {}, std::span<const std::uint8_t> masked = {}) {
    const std::size_t n = corr.size();
    if (gram.rows() != n || gram.cols() != n) {
        throw ShapeError("lasso: gram " + gram.shape_string() + " does not match " +
                         std::to_string(n) + " correlations");
    }
    if (!masked.empty() && masked.size() != n) throw ShapeError("lasso: mask length mismatch");
    if (!(lambda >= 0.0)) throw ConfigError("lasso: lambda must be >= 0");

    LassoResult res;
    res.coefficients.assign(n, 0.0);
    Vector& beta = res.coefficients;
    Vector g(corr.begin(), corr.end()); // Dᵀ residual

    auto update = [&](std::size_t j) -> double {
        if (!masked.empty() && masked[j]) return 0.0;
        const double a = gram(j, j);
        if (a <= 0.0) return 0.0;
        const double old = beta[j];
        const double fresh = soft_threshold(g[j] + a * old, lambda) / a;
        const double delta = fresh - old;
        if (delta != 0.0) {
            beta[j] = fresh;
            auto col = gram.row(j); // symmetric
            for (std::size_t k = 0; k < n; ++k) g[k] -= delta * col[k];
        }
        return std::abs(delta);
    };

    auto move = [&](std::size_t j, double value) {
        const double delta = value - beta[j];
        if (delta == 0.0) return;
        beta[j] = value;
        auto col = gram.row(j);
        for (std::size_t k = 0; k < n; ++k) g[k] -= delta * col[k];
    };

    // Solves G_AA β_A = q_A − λ s_A on the current support with its signs fixed. If the
    // solution flips a sign, steps toward it only up to the first zero crossing, drops that
    // coordinate and retries. Returns false if the support block is numerically singular.
    auto exact_on_support = [&]() -> bool {
        std::vector<std::size_t> active;
        for (std::size_t j = 0; j < n; ++j)
            if (beta[j] != 0.0) active.push_back(j);
        while (!active.empty()) {
            const std::size_t m = active.size();
            Matrix sub(m, m);
            Vector rhs(m);
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = 0; b < m; ++b) sub(a, b) = gram(active[a], active[b]);
                rhs[a] = corr[active[a]] - lambda * (beta[active[a]] > 0.0 ? 1.0 : -1.0);
            }
            const auto sol = numeric::cholesky_solve(sub, rhs);
            if (!sol) return false;
            double step = 1.0;
            std::size_t blocking = m;
            for (std::size_t a = 0; a < m; ++a) {
                const double from = beta[active[a]], to = (*sol)[a];
                if ((from > 0.0 && to <= 0.0) || (from < 0.0 && to >= 0.0)) {
                    const double t = from / (from - to);
                    if (t < step) {
                        step = t;
                        blocking = a;
                    }
                }
            }
            for (std::size_t a = 0; a < m; ++a)
                move(active[a], a == blocking ? 0.0 : beta[active[a]] + step * ((*sol)[a] - beta[active[a]]));
            if (blocking == m) return true;
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(blocking));
        }
        return true;
    };

    while (res.sweeps < opts.max_sweeps) {
        double change = 0.0;
        for (std::size_t j = 0; j < n; ++j) change = std::max(change, update(j));
        ++res.sweeps;
        if (change < opts.tolerance) break;
        if (exact_on_support()) continue;

        std::vector<std::size_t> active;
        for (std::size_t j = 0; j < n; ++j)
            if (beta[j] != 0.0) active.push_back(j);
        for (std::size_t pass = 0; pass < opts.max_sweeps; ++pass) {
            double inner = 0.0;
            for (std::size_t j : active) inner = std::max(inner, update(j));
            ++res.inner_sweeps;
            if (inner < opts.tolerance) break;
        }
    }

    // exact correlations for the optimality check
    Vector fresh_g(corr.begin(), corr.end());
    for (std::size_t j = 0; j < n; ++j) {
        if (beta[j] == 0.0) continue;
        auto col = gram.row(j);
        for (std::size_t k = 0; k < n; ++k) fresh_g[k] -= beta[j] * col[k];
    }
    res.kkt_violation = kkt_violation(beta, fresh_g, lambda, masked);
    if (res.kkt_violation > opts.kkt_tolerance) {
        throw NumericError("lasso did not converge after " + std::to_string(res.sweeps) +
                           " sweeps; KKT violation " + std::to_string(res.kkt_violation));
    }
    return res;
}

/// DᵀD for a dictionary stored one atom per row.
inline Matrix gram_of_rows(const Matrix& atoms) {
    const std::size_t n = atoms.rows();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = numeric::dot(atoms.row(i), atoms.row(j));
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

/// Sparse code of x over the columns of D (d x N).
inline LassoResult sparse_code(std::span<const double> x, const Matrix& dictionary,
                               double lambda, const LassoOptions& opts = {}) {
    if (x.size() != dictionary.rows()) {
        throw ShapeError("sparse_code: signal of length " + std::to_string(x.size()) +
                         " against dictionary " + dictionary.shape_string());
    }
    const Matrix atoms = numeric::transpose(dictionary);
    return lasso_gram(gram_of_rows(atoms), numeric::matvec(atoms, x), lambda, opts);
}

/// ½‖x − Dβ‖² + λ‖β‖₁
inline double lasso_objective(std::span<const double> x, const Matrix& dictionary,
                              std::span<const double> beta, double lambda) {
    const Vector fit = numeric::matvec(dictionary, beta);
    double l1 = 0.0;
    for (double b : beta) l1 += std::abs(b);
    return 0.5 * numeric::squared_distance(x, fit) + lambda * l1;
}

} // namespace ddm::scsp

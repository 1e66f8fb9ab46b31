#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/hddm/network.hpp"

namespace ddm::hddm {

struct FineTuneConfig {
    double lr = 2e-3;
    double decay = 0.6; ///< lr multiplier applied after every epoch
    std::size_t epochs = 20;
    std::size_t batch = 10; ///< videos per gradient step
    double lambda_wd = 0.01;
    double lambda_sp = 0.5;
    double rho = 0.001;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(lr > 0.0)) throw ConfigError("fine-tune learning rate must be > 0");
        if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("fine-tune decay must be in (0, 1]");
        if (epochs < 1 || batch < 1) throw ConfigError("fine-tune epochs and batch must be >= 1");
        if (lambda_wd < 0.0 || lambda_sp < 0.0) throw ConfigError("regularization weights must be >= 0");
        if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("sparsity target must be in (0, 1)");
    }
};

/// ρ̄ is clamped to [ε, 1 − ε] before entering the KL term.
inline constexpr double sparsity_clamp = 1e-7;

struct CostBreakdown {
    double total = 0.0;
    double reconstruction = 0.0; ///< Σ ‖x − x̃‖²
    double weight_decay = 0.0;   ///< Σ ‖W‖²_F over all 2M weight matrices
    double sparsity = 0.0;       ///< Σ KL(ρ ‖ ρ̄) over hidden layers 1 .. 2M−1
};

inline double bernoulli_kl(double rho, double rho_hat) noexcept {
    return rho * std::log(rho / rho_hat) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - rho_hat));
}

inline void check_batch(const Matrix& batch, const HddmParams& p) {
    if (batch.rows() == 0) throw DataError("HDDM cost: empty batch");
    if (batch.cols() != p.input_dim())
        throw ShapeError("HDDM batch frames have length " + std::to_string(batch.cols()) +
                         ", model expects " + std::to_string(p.input_dim()));
}

inline double weight_decay_term(const HddmParams& p) {
    double s = 0.0;
    for (const Layer* l : p.chain()) s += numeric::squared_norm(l->W.values());
    return s;
}

/// Mean activation of every unit of hidden layers 1 .. 2M−1 over the batch, unclamped.
inline std::vector<Vector> mean_hidden_activations(const std::vector<Activations>& acts,
                                                   std::size_t depth) {
    std::vector<Vector> means;
    for (std::size_t layer = 1; layer < 2 * depth; ++layer) {
        Vector m(acts.front()[layer].size(), 0.0);
        for (const auto& a : acts)
            for (std::size_t j = 0; j < m.size(); ++j) m[j] += a[layer][j];
        for (double& v : m) v /= static_cast<double>(acts.size());
        means.push_back(std::move(m));
    }
    return means;
}

/// J_reg = Σ‖x − x̃‖² + λ_wd J_wd + λ_sp J_sp over one batch of frames (one per row).
inline CostBreakdown cost(const Matrix& batch, const HddmParams& p, const FineTuneConfig& cfg) {
    check_batch(batch, p);
    std::vector<Activations> acts;
    acts.reserve(batch.rows());
    CostBreakdown c;
    for (std::size_t n = 0; n < batch.rows(); ++n) {
        acts.push_back(forward(batch.row(n), p));
        c.reconstruction += numeric::squared_distance(batch.row(n), acts.back().back());
    }
    c.weight_decay = weight_decay_term(p);
    for (const Vector& m : mean_hidden_activations(acts, p.depth()))
        for (double r : m)
            c.sparsity += bernoulli_kl(cfg.rho, std::clamp(r, sparsity_clamp, 1.0 - sparsity_clamp));
    c.total = c.reconstruction + cfg.lambda_wd * c.weight_decay + cfg.lambda_sp * c.sparsity;
    return c;
}

struct GradientResult {
    CostBreakdown cost;
    HddmParams grad; ///< same shapes as the parameters
};

/// Exact gradient of J_reg by backpropagation, including the path through ρ̄.
inline GradientResult gradients(const Matrix& batch, const HddmParams& p, const FineTuneConfig& cfg) {
    check_batch(batch, p);
    const std::size_t depth = p.depth();
    const std::size_t nlayers = 2 * depth;
    const auto layers = p.chain();
    const double inv_n = 1.0 / static_cast<double>(batch.rows());

    std::vector<Activations> acts;
    acts.reserve(batch.rows());
    GradientResult r{{}, zeros_like(p)};
    for (std::size_t n = 0; n < batch.rows(); ++n) {
        acts.push_back(forward(batch.row(n), p));
        r.cost.reconstruction += numeric::squared_distance(batch.row(n), acts.back().back());
    }
    r.cost.weight_decay = weight_decay_term(p);

    // dJ_sp/da for one sample, per hidden layer; zero where ρ̄ sits outside the clamp range
    const auto means = mean_hidden_activations(acts, depth);
    std::vector<Vector> sparse_grad;
    for (const Vector& m : means) {
        Vector g(m.size(), 0.0);
        for (std::size_t j = 0; j < m.size(); ++j) {
            const double clamped = std::clamp(m[j], sparsity_clamp, 1.0 - sparsity_clamp);
            r.cost.sparsity += bernoulli_kl(cfg.rho, clamped);
            if (m[j] == clamped)
                g[j] = cfg.lambda_sp * (-cfg.rho / m[j] + (1.0 - cfg.rho) / (1.0 - m[j])) * inv_n;
        }
        sparse_grad.push_back(std::move(g));
    }
    r.cost.total = r.cost.reconstruction + cfg.lambda_wd * r.cost.weight_decay +
                   cfg.lambda_sp * r.cost.sparsity;

    auto glayers = r.grad.chain();
    for (std::size_t n = 0; n < batch.rows(); ++n) {
        const Activations& a = acts[n];
        auto x = batch.row(n);
        Vector da(a.back().size());
        for (std::size_t j = 0; j < da.size(); ++j) da[j] = 2.0 * (a.back()[j] - x[j]);
        for (std::size_t l = nlayers; l >= 1; --l) {
            const Vector& out = a[l];
            if (l < nlayers)
                for (std::size_t j = 0; j < da.size(); ++j) da[j] += sparse_grad[l - 1][j];
            Vector dz(out.size());
            for (std::size_t j = 0; j < dz.size(); ++j) dz[j] = da[j] * out[j] * (1.0 - out[j]);
            numeric::add_outer(glayers[l - 1]->W, 1.0, dz, a[l - 1]);
            for (std::size_t j = 0; j < dz.size(); ++j) glayers[l - 1]->b[j] += dz[j];
            if (l > 1) da = numeric::matvec_transposed(layers[l - 1]->W, dz);
        }
    }
    for (std::size_t l = 0; l < nlayers; ++l) {
        auto g = glayers[l]->W.values();
        auto w = layers[l]->W.values();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * cfg.lambda_wd * w[i];
    }
    for (const Layer* l : r.grad.chain()) {
        if (!l->W.all_finite() || !numeric::all_finite(l->b))
            throw NumericError("HDDM gradient contains non-finite values");
    }
    return r;
}

} // namespace ddm::hddm

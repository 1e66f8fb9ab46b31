#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/numeric/matrix.hpp"
#include "ddm/numeric/ops.hpp"
#include "ddm/numeric/rng.hpp"

namespace ddm::grbm {

using numeric::Matrix;
using numeric::RngStream;
using numeric::Vector;

/// Gaussian-Bernoulli RBM. W is visible x hidden; sigma is shared by all visible units.
struct GrbmParams {
    Matrix W;
    Vector b; ///< visible bias
    Vector c; ///< hidden bias
    double sigma = 1.0;

    std::size_t visible() const noexcept { return W.rows(); }
    std::size_t hidden() const noexcept { return W.cols(); }

    void validate() const {
        if (b.size() != W.rows() || c.size() != W.cols()) {
            throw ShapeError("GRBM shapes inconsistent: W " + W.shape_string() + ", b " +
                             std::to_string(b.size()) + ", c " + std::to_string(c.size()));
        }
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("GRBM sigma must be > 0");
        if (!W.all_finite() || !numeric::all_finite(b) || !numeric::all_finite(c))
            throw NumericError("GRBM parameters contain non-finite values");
    }

    friend bool operator==(const GrbmParams&, const GrbmParams&) = default;
};

struct CdConfig {
    double lr = 1e-3;
    std::size_t epochs = 50;
    std::size_t batch = 32;
    std::size_t k = 1;
    double init_range = 0.005;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(lr > 0.0)) throw ConfigError("CD learning rate must be > 0");
        if (epochs < 1 || batch < 1 || k < 1) throw ConfigError("CD epochs, batch and k must be >= 1");
        if (!(init_range >= 0.0)) throw ConfigError("CD init range must be >= 0");
    }
};

inline void check_visible(std::span<const double> v, const GrbmParams& p) {
    if (v.size() != p.visible())
        throw ShapeError("visible vector of length " + std::to_string(v.size()) +
                         " for GRBM with " + std::to_string(p.visible()) + " visible units");
}

inline void check_hidden(std::span<const double> h, const GrbmParams& p) {
    if (h.size() != p.hidden())
        throw ShapeError("hidden vector of length " + std::to_string(h.size()) +
                         " for GRBM with " + std::to_string(p.hidden()) + " hidden units");
}

/// E(v,h) = Σᵢ (vᵢ−bᵢ)²/2σ² − Σⱼ cⱼhⱼ − Σᵢⱼ wᵢⱼ (vᵢ/σ) hⱼ
inline double energy(std::span<const double> v, std::span<const double> h, const GrbmParams& p) {
    check_visible(v, p);
    check_hidden(h, p);
    const double s2 = p.sigma * p.sigma;
    double quad = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) quad += (v[i] - p.b[i]) * (v[i] - p.b[i]) / (2.0 * s2);
    const double hid = numeric::dot(p.c, h);
    double inter = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto wi = p.W.row(i);
        for (std::size_t j = 0; j < h.size(); ++j) inter += wi[j] * (v[i] / p.sigma) * h[j];
    }
    return quad - hid - inter;
}

/// Bernoulli means ρ(hⱼ = 1 | v) = s(Σᵢ wᵢⱼ vᵢ + cⱼ).
inline Vector prob_h_given_v(std::span<const double> v, const GrbmParams& p) {
    check_visible(v, p);
    Vector pre = numeric::matvec_transposed(p.W, v);
    for (std::size_t j = 0; j < pre.size(); ++j) pre[j] = numeric::sigmoid(pre[j] + p.c[j]);
    return pre;
}

/// Mean of the Gaussian visible conditional, uᵢ = bᵢ + σ² Σⱼ wᵢⱼ hⱼ.
inline Vector mean_v_given_h(std::span<const double> h, const GrbmParams& p) {
    check_hidden(h, p);
    Vector u = numeric::matvec(p.W, h);
    const double s2 = p.sigma * p.sigma;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = p.b[i] + s2 * u[i];
    return u;
}

inline Vector sample_v_given_h(std::span<const double> h, const GrbmParams& p, RngStream& rng) {
    Vector u = mean_v_given_h(h, p);
    for (double& x : u) x += p.sigma * rng.normal();
    return u;
}

inline Vector sample_h_given_v(std::span<const double> v, const GrbmParams& p, RngStream& rng) {
    Vector h = prob_h_given_v(v, p);
    for (double& x : h) x = rng.bernoulli(x) ? 1.0 : 0.0;
    return h;
}

/// Weights uniform in ±init_range, zero biases.
inline GrbmParams init_grbm(std::size_t visible, std::size_t hidden, const CdConfig& cfg,
                            RngStream& rng) {
    if (visible == 0 || hidden == 0) throw ConfigError("GRBM layer sizes must be >= 1");
    GrbmParams p{Matrix(visible, hidden), Vector(visible, 0.0), Vector(hidden, 0.0), 1.0};
    for (double& w : p.W.values()) w = rng.uniform(-cfg.init_range, cfg.init_range);
    return p;
}

/// Where in training a CD step ran; quoted in diagnostics.
struct CdContext {
    std::size_t epoch = 0;
    std::size_t batch = 0;
};

/// One CD-k step on a batch (one sample per row).
///
/// Positive phase uses ρ(h|v₀). The chain samples binary hidden states and uses the mean
/// visible reconstruction; the negative phase uses ρ(h|v_k). The gradient is averaged over
/// the batch, summing samples in row order. Returns the mean squared difference between
/// v₀ and v_k over all entries.
inline double cd_update(const Matrix& batch, GrbmParams& p, const CdConfig& cfg, RngStream& rng,
                        CdContext where = {}) {
    if (batch.cols() != p.visible()) {
        throw ShapeError("CD batch has " + std::to_string(batch.cols()) +
                         " columns for GRBM with " + std::to_string(p.visible()) +
                         " visible units");
    }
    if (batch.rows() == 0) throw DataError("CD batch is empty");
    cfg.validate();

    Matrix dW(p.visible(), p.hidden());
    Vector db(p.visible(), 0.0), dc(p.hidden(), 0.0);
    double sq_err = 0.0;
    const double s2 = p.sigma * p.sigma;

    for (std::size_t n = 0; n < batch.rows(); ++n) {
        auto v0 = batch.row(n);
        const Vector h0 = prob_h_given_v(v0, p);
        Vector vk;
        Vector hk_prob = h0;
        for (std::size_t step = 0; step < cfg.k; ++step) {
            Vector hs(hk_prob.size());
            for (std::size_t j = 0; j < hs.size(); ++j) hs[j] = rng.bernoulli(hk_prob[j]) ? 1.0 : 0.0;
            vk = mean_v_given_h(hs, p);
            hk_prob = prob_h_given_v(vk, p);
        }
        numeric::add_outer(dW, 1.0, v0, h0);
        numeric::add_outer(dW, -1.0, vk, hk_prob);
        for (std::size_t i = 0; i < db.size(); ++i) db[i] += (v0[i] - vk[i]) / s2;
        for (std::size_t j = 0; j < dc.size(); ++j) dc[j] += h0[j] - hk_prob[j];
        sq_err += numeric::squared_distance(v0, vk);
    }

    const double scale = cfg.lr / static_cast<double>(batch.rows());
    auto finite_or_throw = [&](std::span<const double> g, const char* name) {
        if (!numeric::all_finite(g)) {
            throw NumericError(std::string("CD produced a non-finite update for ") + name +
                               " at epoch " + std::to_string(where.epoch) + ", batch " +
                               std::to_string(where.batch));
        }
    };
    finite_or_throw(dW.values(), "W");
    finite_or_throw(db, "b");
    finite_or_throw(dc, "c");

    auto w = p.W.values();
    auto g = dW.values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += scale * g[i];
    for (std::size_t i = 0; i < db.size(); ++i) p.b[i] += scale * db[i];
    for (std::size_t j = 0; j < dc.size(); ++j) p.c[j] += scale * dc[j];

    return sq_err / static_cast<double>(batch.rows() * batch.cols());
}

struct TrainResult {
    GrbmParams params;
    std::vector<double> epoch_errors; ///< sample-weighted mean batch error per epoch
};

/// Trains from an existing parameter set with shuffled mini-batches.
inline TrainResult train_grbm(const Matrix& data, GrbmParams params, const CdConfig& cfg,
                              RngStream& rng) {
    cfg.validate();
    params.validate();
    if (data.rows() == 0) throw DataError("GRBM training data is empty");
    std::vector<std::size_t> order(data.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult out{std::move(params), {}};
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double total = 0.0;
        std::size_t b = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch, ++b) {
            const std::size_t n = std::min(cfg.batch, order.size() - start);
            Matrix batch(n, data.cols());
            for (std::size_t r = 0; r < n; ++r) {
                auto src = data.row(order[start + r]);
                std::copy(src.begin(), src.end(), batch.row(r).begin());
            }
            total += cd_update(batch, out.params, cfg, rng, {epoch, b}) * static_cast<double>(n);
        }
        out.epoch_errors.push_back(total / static_cast<double>(order.size()));
    }
    return out;
}

} // namespace ddm::grbm

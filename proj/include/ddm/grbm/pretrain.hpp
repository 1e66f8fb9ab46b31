#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/grbm/grbm.hpp"

namespace ddm::grbm {

/// Per-feature affine map z = (x − mean) / scale.
struct Standardization {
    Vector mean;
    Vector scale;

    /// Scales below `floor` are raised to it so near-constant features stay bounded.
    static Standardization fit(const Matrix& data, double floor = 1e-2) {
        if (data.rows() == 0) throw DataError("cannot standardize an empty data set");
        Standardization s{Vector(data.cols(), 0.0), Vector(data.cols(), 0.0)};
        const double n = static_cast<double>(data.rows());
        for (std::size_t r = 0; r < data.rows(); ++r) {
            auto row = data.row(r);
            for (std::size_t j = 0; j < row.size(); ++j) s.mean[j] += row[j];
        }
        for (double& m : s.mean) m /= n;
        for (std::size_t r = 0; r < data.rows(); ++r) {
            auto row = data.row(r);
            for (std::size_t j = 0; j < row.size(); ++j) {
                const double d = row[j] - s.mean[j];
                s.scale[j] += d * d;
            }
        }
        for (double& v : s.scale) v = std::max(std::sqrt(v / n), floor);
        return s;
    }

    static Standardization identity(std::size_t dim) {
        return {Vector(dim, 0.0), Vector(dim, 1.0)};
    }

    Matrix apply(const Matrix& data) const {
        if (data.cols() != mean.size()) throw ShapeError("standardization dimension mismatch");
        Matrix out = data;
        for (std::size_t r = 0; r < out.rows(); ++r) {
            auto row = out.row(r);
            for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean[j]) / scale[j];
        }
        return out;
    }

    friend bool operator==(const Standardization&, const Standardization&) = default;
};

/// Greedily trained GRBM chain; layer i was trained on standardized inputs `input_stats[i]`.
struct PretrainedStack {
    std::vector<GrbmParams> layers;
    std::vector<Standardization> input_stats;
    std::vector<std::vector<double>> epoch_errors;

    /// Hidden means of layer i for raw (unstandardized) inputs, one sample per row.
    Matrix activations(std::size_t i, const Matrix& input) const {
        const Matrix z = input_stats.at(i).apply(input);
        Matrix out(z.rows(), layers[i].hidden());
        for (std::size_t r = 0; r < z.rows(); ++r) {
            const Vector h = prob_h_given_v(z.row(r), layers[i]);
            std::copy(h.begin(), h.end(), out.row(r).begin());
        }
        return out;
    }

    /// Each layer re-expressed on raw inputs: W' = diag(1/scale) W, c' = c − W'ᵀ mean.
    /// The visible bias becomes the logit of the layer's reconstruction mean at h = 0,
    /// mean + scale ⊙ b, clamped into [0.001, 0.999], so it can feed a sigmoid decoder.
    std::vector<GrbmParams> unstandardized() const {
        std::vector<GrbmParams> out;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const GrbmParams& g = layers[i];
            const Standardization& s = input_stats[i];
            GrbmParams f = g;
            for (std::size_t v = 0; v < g.visible(); ++v) {
                auto row = f.W.row(v);
                for (double& w : row) w /= s.scale[v];
            }
            const Vector shift = numeric::matvec_transposed(f.W, s.mean);
            for (std::size_t j = 0; j < f.c.size(); ++j) f.c[j] -= shift[j];
            for (std::size_t v = 0; v < g.visible(); ++v) {
                const double m = std::clamp(s.mean[v] + s.scale[v] * g.b[v], 1e-3, 1.0 - 1e-3);
                f.b[v] = std::log(m / (1.0 - m));
            }
            f.sigma = 1.0;
            out.push_back(std::move(f));
        }
        return out;
    }
};

struct PretrainOptions {
    bool standardize = true;
    double scale_floor = 1e-2;
};

/// Greedy layer-wise training: GRBM i is fit to the hidden means of GRBM i−1.
inline PretrainedStack pretrain_stack(const Matrix& data, std::span<const std::size_t> layer_sizes,
                                      const CdConfig& cfg, const PretrainOptions& opts = {}) {
    if (layer_sizes.empty()) throw ConfigError("pretrain_stack: no layer sizes given");
    if (data.rows() == 0) throw DataError("pretrain_stack: no training data");
    cfg.validate();
    RngStream root(cfg.seed);
    PretrainedStack stack;
    Matrix input = data;
    for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
        RngStream rng = root.derive(i);
        Standardization s = opts.standardize ? Standardization::fit(input, opts.scale_floor)
                                             : Standardization::identity(input.cols());
        const Matrix z = s.apply(input);
        GrbmParams init = init_grbm(input.cols(), layer_sizes[i], cfg, rng);
        TrainResult r = train_grbm(z, std::move(init), cfg, rng);
        stack.layers.push_back(std::move(r.params));
        stack.input_stats.push_back(std::move(s));
        stack.epoch_errors.push_back(std::move(r.epoch_errors));
        if (i + 1 < layer_sizes.size()) input = stack.activations(i, input);
    }
    return stack;
}

} // namespace ddm::grbm

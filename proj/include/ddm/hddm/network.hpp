#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/grbm/grbm.hpp"
#include "ddm/numeric/matrix.hpp"
#include "ddm/numeric/ops.hpp"
#include "ddm/numeric/rng.hpp"

namespace ddm::hddm {

using numeric::Matrix;
using numeric::RngStream;
using numeric::Vector;

/// Fully connected sigmoid layer, out = s(W in + b) with W of shape out x in.
struct Layer {
    Matrix W;
    Vector b;

    std::size_t in_dim() const noexcept { return W.cols(); }
    std::size_t out_dim() const noexcept { return W.rows(); }

    friend bool operator==(const Layer&, const Layer&) = default;
};

/// Encoder layers 1..M map input -> code, decoder layers 1..M map code -> reconstruction.
struct HddmParams {
    std::vector<Layer> encoder;
    std::vector<Layer> decoder;

    std::size_t depth() const noexcept { return encoder.size(); }
    std::size_t input_dim() const noexcept { return encoder.empty() ? 0 : encoder.front().in_dim(); }
    std::size_t code_dim() const noexcept { return encoder.empty() ? 0 : encoder.back().out_dim(); }

    /// Hidden sizes n_1..n_M.
    std::vector<std::size_t> layer_sizes() const {
        std::vector<std::size_t> s;
        for (const auto& l : encoder) s.push_back(l.out_dim());
        return s;
    }

    /// All 2M layers in evaluation order.
    std::vector<const Layer*> chain() const {
        std::vector<const Layer*> c;
        for (const auto& l : encoder) c.push_back(&l);
        for (const auto& l : decoder) c.push_back(&l);
        return c;
    }
    std::vector<Layer*> chain() {
        std::vector<Layer*> c;
        for (auto& l : encoder) c.push_back(&l);
        for (auto& l : decoder) c.push_back(&l);
        return c;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const Layer* l : chain()) n += l->W.size() + l->b.size();
        return n;
    }

    void validate() const {
        if (encoder.empty() || encoder.size() != decoder.size())
            throw ShapeError("HDDM needs M >= 1 encoder layers and as many decoder layers");
        std::size_t dim = input_dim();
        for (const Layer* l : chain()) {
            if (l->in_dim() != dim || l->b.size() != l->out_dim())
                throw ShapeError("HDDM layer chain is not shape-consistent");
            if (!l->W.all_finite() || !numeric::all_finite(l->b))
                throw NumericError("HDDM parameters contain non-finite values");
            dim = l->out_dim();
        }
        if (dim != input_dim()) throw ShapeError("HDDM output dimension differs from input dimension");
    }

    friend bool operator==(const HddmParams&, const HddmParams&) = default;
};

/// Zero-filled parameters with the same shapes.
inline HddmParams zeros_like(const HddmParams& p) {
    HddmParams z = p;
    for (Layer* l : z.chain()) {
        std::fill(l->W.values().begin(), l->W.values().end(), 0.0);
        std::fill(l->b.begin(), l->b.end(), 0.0);
    }
    return z;
}

/// Symmetric architecture input -> n_1 -> ... -> n_M -> ... -> n_1 -> input with weights
/// uniform in ±range and zero biases.
inline HddmParams random_hddm(std::size_t input_dim, std::span<const std::size_t> sizes,
                              RngStream& rng, double range = 0.1) {
    if (sizes.empty()) throw ConfigError("HDDM needs at least one hidden layer");
    std::vector<std::size_t> dims{input_dim};
    dims.insert(dims.end(), sizes.begin(), sizes.end());
    auto make = [&](std::size_t in, std::size_t out) {
        Layer l{Matrix(out, in), Vector(out, 0.0)};
        for (double& w : l.W.values()) w = rng.uniform(-range, range);
        return l;
    };
    HddmParams p;
    for (std::size_t i = 1; i < dims.size(); ++i) p.encoder.push_back(make(dims[i - 1], dims[i]));
    for (std::size_t i = dims.size() - 1; i > 0; --i) p.decoder.push_back(make(dims[i], dims[i - 1]));
    return p;
}

/// Activations a_0 = x, a_1 .. a_2M (a_M is the code, a_2M the reconstruction).
using Activations = std::vector<Vector>;

inline Vector apply_layer(const Layer& l, std::span<const double> in) {
    Vector z = numeric::matvec(l.W, in);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = numeric::sigmoid(z[j] + l.b[j]);
    return z;
}

inline Activations forward(std::span<const double> x, const HddmParams& p) {
    if (x.size() != p.input_dim())
        throw ShapeError("HDDM input of length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(p.input_dim()));
    Activations a;
    a.reserve(2 * p.depth() + 1);
    a.emplace_back(x.begin(), x.end());
    for (const Layer* l : p.chain()) a.push_back(apply_layer(*l, a.back()));
    return a;
}

struct EncodeResult {
    Vector code;
    Activations activations; ///< x, then the M encoder outputs
};

inline EncodeResult encode(std::span<const double> x, const HddmParams& p) {
    if (x.size() != p.input_dim())
        throw ShapeError("encode: input of length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(p.input_dim()));
    EncodeResult r;
    r.activations.emplace_back(x.begin(), x.end());
    for (const auto& l : p.encoder) r.activations.push_back(apply_layer(l, r.activations.back()));
    r.code = r.activations.back();
    return r;
}

struct DecodeResult {
    Vector reconstruction;
    Activations activations; ///< h, then the M decoder outputs
};

inline DecodeResult decode(std::span<const double> h, const HddmParams& p) {
    if (h.size() != p.code_dim())
        throw ShapeError("decode: code of length " + std::to_string(h.size()) + ", expected " +
                         std::to_string(p.code_dim()));
    DecodeResult r;
    r.activations.emplace_back(h.begin(), h.end());
    for (const auto& l : p.decoder) r.activations.push_back(apply_layer(l, r.activations.back()));
    r.reconstruction = r.activations.back();
    return r;
}

/// Ties a GRBM chain into an autoencoder: W_e⁽ⁱ⁾ = Wᵢᵀ, b_e⁽ⁱ⁾ = cᵢ,
/// W_d⁽ᴹ⁻ⁱ⁺¹⁾ = (W_e⁽ⁱ⁾)ᵀ, b_d⁽ᴹ⁻ⁱ⁺¹⁾ = bᵢ.
inline HddmParams init_from_pretraining(std::span<const grbm::GrbmParams> grbms) {
    if (grbms.empty()) throw ConfigError("init_from_pretraining: empty GRBM stack");
    for (std::size_t i = 0; i < grbms.size(); ++i) {
        grbms[i].validate();
        if (i > 0 && grbms[i].visible() != grbms[i - 1].hidden()) {
            throw ShapeError("GRBM " + std::to_string(i + 1) + " has " +
                             std::to_string(grbms[i].visible()) + " visible units but GRBM " +
                             std::to_string(i) + " has " + std::to_string(grbms[i - 1].hidden()) +
                             " hidden units");
        }
    }
    const std::size_t m = grbms.size();
    HddmParams p;
    p.encoder.resize(m);
    p.decoder.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        p.encoder[i] = Layer{numeric::transpose(grbms[i].W), grbms[i].c};
        p.decoder[m - 1 - i] = Layer{numeric::transpose(p.encoder[i].W), grbms[i].b};
    }
    return p;
}

/// Flat copy of every parameter: per layer in chain order, W row-major then b.
inline Vector flatten(const HddmParams& p) {
    Vector out;
    out.reserve(p.parameter_count());
    for (const Layer* l : p.chain()) {
        auto w = l->W.values();
        out.insert(out.end(), w.begin(), w.end());
        out.insert(out.end(), l->b.begin(), l->b.end());
    }
    return out;
}

inline HddmParams unflatten(std::span<const double> flat, const HddmParams& like) {
    if (flat.size() != like.parameter_count())
        throw ShapeError("unflatten: " + std::to_string(flat.size()) + " values for " +
                         std::to_string(like.parameter_count()) + " parameters");
    HddmParams p = like;
    std::size_t pos = 0;
    for (Layer* l : p.chain()) {
        for (double& w : l->W.values()) w = flat[pos++];
        for (double& b : l->b) b = flat[pos++];
    }
    return p;
}

} // namespace ddm::hddm

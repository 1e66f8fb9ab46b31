#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/hddm/cost.hpp"
#include "ddm/hddm/network.hpp"
#include "ddm/scsp/sequence.hpp"

namespace ddm::hddm {

/// A fine-tuned model for one class.
struct ClassModel {
    int label = 0;
    HddmParams params;
    std::size_t epochs_run = 0;
    double final_cost = 0.0;
    std::vector<double> cost_history; ///< J_reg over all training frames after each epoch

    /// Fraction of epochs whose end cost did not exceed the previous one.
    double monotone_fraction() const {
        if (cost_history.size() < 2) return 1.0;
        std::size_t ok = 0;
        for (std::size_t i = 1; i < cost_history.size(); ++i) ok += cost_history[i] <= cost_history[i - 1];
        return static_cast<double>(ok) / static_cast<double>(cost_history.size() - 1);
    }

    friend bool operator==(const ClassModel&, const ClassModel&) = default;
};

/// Training diverged; carries the parameters from the end of the last finite epoch.
class DivergenceError : public NumericError {
public:
    DivergenceError(const std::string& what, HddmParams last_good)
        : NumericError(what), last_good_(std::move(last_good)) {}
    const HddmParams& last_good() const noexcept { return last_good_; }

private:
    HddmParams last_good_;
};

/// Stacks every frame of the given sequences into one matrix.
inline Matrix stack_frames(std::span<const scsp::ScspSequence> seqs,
                           std::span<const std::size_t> which) {
    std::size_t rows = 0;
    const std::size_t dim = seqs[which.front()].frame_dim();
    for (std::size_t i : which) {
        if (seqs[i].frame_dim() != dim)
            throw ShapeError("sequence '" + seqs[i].video_id + "' has frame length " +
                             std::to_string(seqs[i].frame_dim()) + ", expected " +
                             std::to_string(dim));
        rows += seqs[i].length();
    }
    Matrix m(rows, dim);
    std::size_t r = 0;
    for (std::size_t i : which)
        for (std::size_t l = 0; l < seqs[i].length(); ++l, ++r) {
            auto src = seqs[i].frame(l);
            std::copy(src.begin(), src.end(), m.row(r).begin());
        }
    return m;
}

inline Matrix stack_frames(std::span<const scsp::ScspSequence> seqs) {
    std::vector<std::size_t> all(seqs.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return stack_frames(seqs, all);
}

/// Mini-batch SGD on J_reg for one class. Each step uses every frame of `cfg.batch` videos;
/// video order is reshuffled per epoch and the learning rate is multiplied by `cfg.decay`
/// after every epoch. Encoder and decoder weights are updated independently.
inline ClassModel fine_tune(std::span<const scsp::ScspSequence> data, HddmParams params,
                            const FineTuneConfig& cfg, RngStream& rng, int label = 0) {
    cfg.validate();
    params.validate();
    if (data.empty()) throw DataError("fine_tune: no training sequences for class " + std::to_string(label));

    const Matrix all = stack_frames(data);
    if (all.cols() != params.input_dim())
        throw ShapeError("fine_tune: frames of length " + std::to_string(all.cols()) +
                         " for a model with input dimension " + std::to_string(params.input_dim()));

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    ClassModel model;
    model.label = label;
    double lr = cfg.lr;
    HddmParams last_good = params;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        try {
            for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
                const std::size_t n = std::min(cfg.batch, order.size() - start);
                const Matrix batch = stack_frames(data, std::span(order).subspan(start, n));
                GradientResult g = gradients(batch, params, cfg);
                auto pl = params.chain();
                auto gl = g.grad.chain();
                for (std::size_t l = 0; l < pl.size(); ++l) {
                    const std::string name = (l < params.depth() ? "W_e[" : "W_d[") +
                                             std::to_string(l % params.depth() + 1) + "]";
                    numeric::sgd_step(pl[l]->W.values(), gl[l]->W.values(), lr, name);
                    numeric::sgd_step(pl[l]->b, gl[l]->b, lr, "b" + name.substr(1));
                }
            }
        } catch (const NumericError& e) {
            throw DivergenceError("class " + std::to_string(label) + " diverged in epoch " +
                                      std::to_string(epoch + 1) + ": " + e.what(),
                                  last_good);
        }
        const double c = cost(all, params, cfg).total;
        if (!std::isfinite(c)) {
            throw DivergenceError("class " + std::to_string(label) + " cost became non-finite in epoch " +
                                      std::to_string(epoch + 1),
                                  last_good);
        }
        model.cost_history.push_back(c);
        last_good = params;
        lr *= cfg.decay;
    }
    model.params = std::move(params);
    model.epochs_run = cfg.epochs;
    model.final_cost = model.cost_history.back();
    return model;
}

struct Reconstruction {
    Vector reconstruction;
    double error = 0.0; ///< ‖x − x̃‖₂
};

inline Reconstruction reconstruct(std::span<const double> x, const HddmParams& p) {
    const EncodeResult e = encode(x, p);
    Reconstruction r{decode(e.code, p).reconstruction, 0.0};
    r.error = std::sqrt(numeric::squared_distance(x, r.reconstruction));
    return r;
}

inline Reconstruction reconstruct(std::span<const double> x, const ClassModel& m) {
    return reconstruct(x, m.params);
}

} // namespace ddm::hddm

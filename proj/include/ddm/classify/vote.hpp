#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddm/error.hpp"
#include "ddm/hddm/train.hpp"
#include "ddm/scsp/sequence.hpp"

namespace ddm::classify {

using hddm::ClassModel;
using numeric::Matrix;

/// exp(−error), the weight of one frame's vote.
inline double vote_weight_from_error(double error) noexcept { return std::exp(-error); }

/// μ_c(x) = exp(−‖x − x̃_c‖₂)
inline double vote_weight(std::span<const double> frame, const ClassModel& model) {
    if (frame.size() != model.params.input_dim())
        throw ShapeError("frame of length " + std::to_string(frame.size()) + " for class " +
                         std::to_string(model.label) + " model with input dimension " +
                         std::to_string(model.params.input_dim()));
    return vote_weight_from_error(hddm::reconstruct(frame, model).error);
}

struct ClassificationReport {
    std::string video_id;
    std::vector<int> labels;      ///< in model order
    std::vector<double> weights;  ///< accumulated Σ μ_c per label
    Matrix errors;                ///< labels x frames, ‖x − x̃_c‖₂
    int predicted = 0;
    std::string tie_break = "lowest-label";

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["video_id"] = video_id;
        j["predicted"] = predicted;
        j["tie_break"] = tie_break;
        j["labels"] = labels;
        j["weights"] = weights;
        nlohmann::json errs = nlohmann::json::array();
        for (std::size_t c = 0; c < errors.rows(); ++c) {
            auto r = errors.row(c);
            errs.push_back(std::vector<double>(r.begin(), r.end()));
        }
        j["frame_errors"] = errs;
        return j;
    }

    /// Aligned two-column table of accumulated weights; the winner is starred.
    std::string to_table() const {
        std::ostringstream os;
        char line[128];
        std::snprintf(line, sizeof line, "%-8s %18s\n", "class", "weight");
        os << line;
        for (std::size_t c = 0; c < labels.size(); ++c) {
            std::snprintf(line, sizeof line, "%-8d %18.12f%s\n", labels[c], weights[c],
                          labels[c] == predicted ? " *" : "");
            os << line;
        }
        os << "predicted: " << predicted << "\n";
        return os.str();
    }
};

/// Accumulated weights Σ_l exp(−e[c][l]) and the winning label, lowest label on ties.
inline void accumulate_votes(ClassificationReport& r) {
    r.weights.assign(r.labels.size(), 0.0);
    std::size_t best = 0;
    for (std::size_t c = 0; c < r.labels.size(); ++c) {
        for (double e : r.errors.row(c)) r.weights[c] += vote_weight_from_error(e);
        if (c > 0 && (r.weights[c] > r.weights[best] ||
                      (r.weights[c] == r.weights[best] && r.labels[c] < r.labels[best])))
            best = c;
    }
    r.predicted = r.labels[best];
}

/// Every frame votes for every class with weight exp(−reconstruction error).
inline ClassificationReport classify(const scsp::ScspSequence& query,
                                     std::span<const ClassModel> models) {
    if (models.empty()) throw DataError("classify: no class models");
    if (query.length() == 0) throw DataError("classify: query has no frames");
    ClassificationReport r;
    r.video_id = query.video_id;
    r.errors = Matrix(models.size(), query.length());
    for (std::size_t c = 0; c < models.size(); ++c) {
        if (models[c].params.input_dim() != query.frame_dim())
            throw ShapeError("query '" + query.video_id + "' has frames of length " +
                             std::to_string(query.frame_dim()) + " but the class " +
                             std::to_string(models[c].label) + " model expects " +
                             std::to_string(models[c].params.input_dim()) +
                             " (features and model were built with different settings)");
        r.labels.push_back(models[c].label);
        for (std::size_t l = 0; l < query.length(); ++l)
            r.errors(c, l) = hddm::reconstruct(query.frame(l), models[c]).error;
    }
    accumulate_votes(r);
    return r;
}

} // namespace ddm::classify

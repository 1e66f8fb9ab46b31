#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/numeric/matrix.hpp"

namespace ddm::data {

/// Rows are true labels, columns predictions; label l occupies index l − 1.
struct ConfusionMatrix {
    std::size_t classes = 0;
    std::vector<std::size_t> counts;

    explicit ConfusionMatrix(std::size_t c = 0) : classes(c), counts(c * c, 0) {}

    void add(int truth, int predicted) {
        if (truth < 1 || predicted < 1 || truth > static_cast<int>(classes) ||
            predicted > static_cast<int>(classes))
            throw DataError("confusion matrix: label out of range");
        ++counts[(truth - 1) * classes + (predicted - 1)];
    }

    std::size_t at(std::size_t truth, std::size_t predicted) const {
        return counts[truth * classes + predicted];
    }
    std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
    std::size_t trace() const {
        std::size_t t = 0;
        for (std::size_t i = 0; i < classes; ++i) t += at(i, i);
        return t;
    }
    double accuracy() const { return total() == 0 ? 0.0 : static_cast<double>(trace()) / total(); }

    std::string to_csv() const {
        std::string s = "truth\\predicted";
        for (std::size_t j = 0; j < classes; ++j) s += "," + std::to_string(j + 1);
        s += "\n";
        for (std::size_t i = 0; i < classes; ++i) {
            s += std::to_string(i + 1);
            for (std::size_t j = 0; j < classes; ++j) s += "," + std::to_string(at(i, j));
            s += "\n";
        }
        return s;
    }
};

struct MapResult {
    double map = 0.0;
    std::vector<double> average_precision; ///< per class; excluded classes hold 0
    std::vector<int> excluded;             ///< labels with no positive query
};

/// Average precision of one ranked list: mean of precision@k over the ranks k of positives.
inline double average_precision(std::span<const double> scores, const std::vector<bool>& positive) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (positive[order[rank]]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

/// scores: queries x classes (column j is label j + 1); truth: label per query.
/// Classes without positives are skipped and listed in `excluded`.
inline MapResult mean_average_precision(const numeric::Matrix& scores, std::span<const int> truth) {
    if (scores.rows() != truth.size())
        throw ShapeError("mAP: " + std::to_string(scores.rows()) + " score rows for " +
                         std::to_string(truth.size()) + " queries");
    MapResult r;
    r.average_precision.assign(scores.cols(), 0.0);
    std::size_t counted = 0;
    for (std::size_t c = 0; c < scores.cols(); ++c) {
        std::vector<double> col(scores.rows());
        std::vector<bool> pos(scores.rows());
        bool any = false;
        for (std::size_t q = 0; q < scores.rows(); ++q) {
            col[q] = scores(q, c);
            pos[q] = truth[q] == static_cast<int>(c + 1);
            any = any || pos[q];
        }
        if (!any) {
            r.excluded.push_back(static_cast<int>(c + 1));
            continue;
        }
        r.average_precision[c] = average_precision(col, pos);
        r.map += r.average_precision[c];
        ++counted;
    }
    if (counted > 0) r.map /= static_cast<double>(counted);
    return r;
}

} // namespace ddm::data

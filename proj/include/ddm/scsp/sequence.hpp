#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "ddm/error.hpp"
#include "ddm/numeric/matrix.hpp"

namespace ddm::scsp {

/// A video as an ordered sequence of equal-length feature frames.
struct ScspSequence {
    std::string video_id;
    int label = 0; ///< 0 when unknown
    numeric::Matrix frames; ///< one frame per row

    std::size_t length() const noexcept { return frames.rows(); }
    std::size_t frame_dim() const noexcept { return frames.cols(); }
    std::span<const double> frame(std::size_t l) const noexcept { return frames.row(l); }

    friend bool operator==(const ScspSequence&, const ScspSequence&) = default;
};

/// Splits a code vector into `frames` rows, zero-padding the tail to a multiple of `frames`.
inline ScspSequence reshape_to_sequence(std::span<const double> code, std::size_t frames,
                                        std::string video_id = {}) {
    if (frames == 0) throw ConfigError("reshape_to_sequence: sequence length must be >= 1");
    if (code.empty()) throw ShapeError("reshape_to_sequence: empty code vector");
    const std::size_t per = (code.size() + frames - 1) / frames;
    numeric::Matrix m(frames, per, 0.0);
    auto out = m.values();
    for (std::size_t i = 0; i < code.size(); ++i) out[i] = code[i];
    return ScspSequence{std::move(video_id), 0, std::move(m)};
}

/// Maps each frame into [0, 1] as |x| / max|x|; all-zero frames stay zero.
inline ScspSequence scaled_to_unit_range(ScspSequence s) {
    for (std::size_t r = 0; r < s.frames.rows(); ++r) {
        auto row = s.frames.row(r);
        double peak = 0.0;
        for (double& x : row) {
            x = std::abs(x);
            peak = std::max(peak, x);
        }
        if (peak > 0.0)
            for (double& x : row) x /= peak;
    }
    return s;
}

inline numeric::Vector flatten(const ScspSequence& s) {
    auto v = s.frames.values();
    return numeric::Vector(v.begin(), v.end());
}

} // namespace ddm::scsp

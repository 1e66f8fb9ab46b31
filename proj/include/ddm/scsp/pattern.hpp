#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/scsp/blocks.hpp"
#include "ddm/scsp/video.hpp"

namespace ddm::scsp {

/// The three orthogonal planes through the centre of a block.
enum class PlaneKind { xy, xt, yt };

inline constexpr std::array<PlaneKind, 3> plane_order{PlaneKind::xy, PlaneKind::xt,
                                                      PlaneKind::yt};

/// Signed differences between diametrically opposite ring neighbours.
///
/// ring[p] and ring[p + P/2] are symmetric about the centre; the result has P/2 entries,
/// ring[p] - ring[p + P/2] for p = 0 .. P/2 - 1.
inline std::vector<double> symmetric_pairs(std::span<const double> ring) {
    if (ring.size() % 2 != 0) {
        throw ConfigError("symmetric variation needs an even neighbour count, got P=" +
                          std::to_string(ring.size()));
    }
    const std::size_t half = ring.size() / 2;
    std::vector<double> out(half);
    for (std::size_t p = 0; p < half; ++p) out[p] = ring[p] - ring[p + half];
    return out;
}

/// A 2-D slice of a block for one channel, row-major.
struct Plane {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const noexcept { return values[r * cols + c]; }
};

inline Plane extract_plane(const Block& b, PlaneKind kind, std::size_t channel) {
    Plane p;
    switch (kind) {
    case PlaneKind::xy: // rows = y, cols = x, at the middle frame
        p.rows = b.h;
        p.cols = b.w;
        for (std::size_t y = 0; y < b.h; ++y)
            for (std::size_t x = 0; x < b.w; ++x) p.values.push_back(b.at(b.d / 2, y, x, channel));
        break;
    case PlaneKind::xt: // rows = t, cols = x, at the middle row
        p.rows = b.d;
        p.cols = b.w;
        for (std::size_t t = 0; t < b.d; ++t)
            for (std::size_t x = 0; x < b.w; ++x) p.values.push_back(b.at(t, b.h / 2, x, channel));
        break;
    case PlaneKind::yt: // rows = t, cols = y, at the middle column
        p.rows = b.d;
        p.cols = b.h;
        for (std::size_t t = 0; t < b.d; ++t)
            for (std::size_t y = 0; y < b.h; ++y) p.values.push_back(b.at(t, y, b.w / 2, channel));
        break;
    }
    return p;
}

/// Number of pattern values a rows x cols plane yields.
///
/// Both axes >= 3: every interior pixel is a centre with the 8-neighbour ring (4 values).
/// One axis >= 3: the ring degenerates to the two neighbours along that axis (1 value).
/// Otherwise the plane has no centres.
inline std::size_t plane_pattern_length(std::size_t rows, std::size_t cols) noexcept {
    if (rows >= 3 && cols >= 3) return (rows - 2) * (cols - 2) * 4;
    if (rows >= 3) return (rows - 2) * cols;
    if (cols >= 3) return rows * (cols - 2);
    return 0;
}

/// Pattern vector of one plane: centres in row-major order, each contributing its pairs.
inline std::vector<double> plane_pattern(const Plane& p) {
    std::vector<double> out;
    out.reserve(plane_pattern_length(p.rows, p.cols));
    if (p.rows >= 3 && p.cols >= 3) {
        std::array<double, 8> ring{};
        for (std::size_t r = 1; r + 1 < p.rows; ++r) {
            for (std::size_t c = 1; c + 1 < p.cols; ++c) {
                // counter-clockwise from east; ring[i] and ring[i+4] are opposite
                ring = {p.at(r, c + 1),     p.at(r - 1, c + 1), p.at(r - 1, c),
                        p.at(r - 1, c - 1), p.at(r, c - 1),     p.at(r + 1, c - 1),
                        p.at(r + 1, c),     p.at(r + 1, c + 1)};
                for (double v : symmetric_pairs(ring)) out.push_back(v);
            }
        }
    } else if (p.rows >= 3) {
        for (std::size_t r = 1; r + 1 < p.rows; ++r)
            for (std::size_t c = 0; c < p.cols; ++c) out.push_back(p.at(r - 1, c) - p.at(r + 1, c));
    } else if (p.cols >= 3) {
        for (std::size_t r = 0; r < p.rows; ++r)
            for (std::size_t c = 1; c + 1 < p.cols; ++c) out.push_back(p.at(r, c + 1) - p.at(r, c - 1));
    }
    return out;
}

inline std::vector<double> symmetric_variation(const Block& b, PlaneKind kind,
                                               std::size_t channel = 0) {
    return plane_pattern(extract_plane(b, kind, channel));
}

/// Values per block per channel, summed over the three planes.
inline std::size_t per_block_length(const BlockSpec& spec) noexcept {
    return plane_pattern_length(spec.h, spec.w) + plane_pattern_length(spec.d, spec.w) +
           plane_pattern_length(spec.d, spec.h);
}

struct EncodedVideo {
    std::vector<double> features;
    std::size_t slabs = 0, rows = 0, cols = 0;
    std::size_t per_block = 0;
    std::size_t channels = 1;

    std::size_t dim() const noexcept { return features.size(); }

    /// Offset of a block's slice within the feature vector.
    std::size_t block_offset(std::size_t channel, std::size_t slab, std::size_t r,
                             std::size_t c) const noexcept {
        return (((channel * slabs + slab) * rows + r) * cols + c) * per_block;
    }
};

inline std::size_t encoded_dim(std::size_t frames, std::size_t height, std::size_t width,
                               std::size_t channels, const BlockSpec& spec) {
    const BlockGrid g = grid_shape(frames, height, width, spec);
    return g.count() * per_block_length(spec) * channels;
}

/// Concatenated symmetric-variation descriptor of every block:
/// channel-major, then slab, then row-major block grid, then plane order (xy, xt, yt).
inline EncodedVideo encode_video(const VideoTensor& video, const BlockSpec& spec) {
    const BlockGrid g = decompose_blocks(video, spec);
    EncodedVideo e;
    e.slabs = g.slabs;
    e.rows = g.rows;
    e.cols = g.cols;
    e.per_block = per_block_length(spec);
    e.channels = video.channels();
    e.features.reserve(g.count() * e.per_block * e.channels);
    for (std::size_t ch = 0; ch < e.channels; ++ch) {
        for (const Block& b : g.blocks) {
            for (PlaneKind k : plane_order) {
                const auto pattern = symmetric_variation(b, k, ch);
                e.features.insert(e.features.end(), pattern.begin(), pattern.end());
            }
        }
    }
    return e;
}

} // namespace ddm::scsp

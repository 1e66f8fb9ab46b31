#pragma once

#include <cstddef>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/scsp/video.hpp"

namespace ddm::scsp {

/// One w x h x d cube of a video, all channels, stored [t][y][x][c].
struct Block {
    std::size_t d = 0, h = 0, w = 0, channels = 1;
    std::vector<double> values;

    double at(std::size_t t, std::size_t y, std::size_t x, std::size_t c = 0) const noexcept {
        return values[((t * h + y) * w + x) * channels + c];
    }
};

struct BlockGrid {
    std::size_t slabs = 0; ///< temporal
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t row_offset = 0; ///< rows dropped above the grid
    std::size_t col_offset = 0;
    std::vector<Block> blocks;  ///< slab-major, then row-major over the spatial grid

    std::size_t count() const noexcept { return slabs * rows * cols; }
    const Block& at(std::size_t s, std::size_t r, std::size_t c) const {
        return blocks[(s * rows + r) * cols + c];
    }
};

/// Spatial/temporal grid dimensions for a video of the given size.
inline BlockGrid grid_shape(std::size_t frames, std::size_t height, std::size_t width,
                            const BlockSpec& spec) {
    spec.validate();
    if (frames < spec.d || height < spec.h || width < spec.w) {
        throw ShapeError("video " + std::to_string(frames) + "x" + std::to_string(height) + "x" +
                         std::to_string(width) + " (TxHxW) is smaller than one " +
                         spec.to_string() + " block");
    }
    BlockGrid g;
    g.slabs = frames / spec.d; // trailing frames that do not fill a slab are dropped
    g.rows = height / spec.h;
    g.cols = width / spec.w;
    g.row_offset = (height - g.rows * spec.h) / 2;
    g.col_offset = (width - g.cols * spec.w) / 2;
    return g;
}

/// Tiles the video with non-overlapping cubes.
inline BlockGrid decompose_blocks(const VideoTensor& video, const BlockSpec& spec) {
    BlockGrid g = grid_shape(video.frames(), video.height(), video.width(), spec);
    const std::size_t nc = video.channels();
    g.blocks.reserve(g.count());
    for (std::size_t s = 0; s < g.slabs; ++s) {
        for (std::size_t r = 0; r < g.rows; ++r) {
            for (std::size_t c = 0; c < g.cols; ++c) {
                Block b{spec.d, spec.h, spec.w, nc, {}};
                b.values.reserve(spec.d * spec.h * spec.w * nc);
                for (std::size_t t = 0; t < spec.d; ++t)
                    for (std::size_t y = 0; y < spec.h; ++y)
                        for (std::size_t x = 0; x < spec.w; ++x)
                            for (std::size_t ch = 0; ch < nc; ++ch)
                                b.values.push_back(video.at(s * spec.d + t,
                                                            g.row_offset + r * spec.h + y,
                                                            g.col_offset + c * spec.w + x, ch));
                g.blocks.push_back(std::move(b));
            }
        }
    }
    return g;
}

} // namespace ddm::scsp

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ddm/error.hpp"

namespace ddm::scsp {

/// Raw video, T x H x W x C intensities in [0, 1], stored t-major then row, column, channel.
class VideoTensor {
public:
    VideoTensor() = default;

    VideoTensor(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels,
                double fill = 0.0)
        : t_(frames), h_(height), w_(width), c_(channels),
          pixels_(frames * height * width * channels, fill) {
        validate_shape();
    }

    VideoTensor(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels,
                std::vector<double> pixels)
        : t_(frames), h_(height), w_(width), c_(channels), pixels_(std::move(pixels)) {
        validate_shape();
        if (pixels_.size() != t_ * h_ * w_ * c_) {
            throw ShapeError("video pixel buffer has " + std::to_string(pixels_.size()) +
                             " values, expected " + std::to_string(t_ * h_ * w_ * c_));
        }
        for (double v : pixels_) {
            if (!(v >= 0.0 && v <= 1.0)) throw DataError("video pixel outside [0,1]");
        }
    }

    std::size_t frames() const noexcept { return t_; }
    std::size_t height() const noexcept { return h_; }
    std::size_t width() const noexcept { return w_; }
    std::size_t channels() const noexcept { return c_; }

    double& at(std::size_t t, std::size_t y, std::size_t x, std::size_t c = 0) noexcept {
        return pixels_[((t * h_ + y) * w_ + x) * c_ + c];
    }
    double at(std::size_t t, std::size_t y, std::size_t x, std::size_t c = 0) const noexcept {
        return pixels_[((t * h_ + y) * w_ + x) * c_ + c];
    }

    const std::vector<double>& pixels() const noexcept { return pixels_; }

    /// Frames [first, first + count) as a new video.
    VideoTensor slice_frames(std::size_t first, std::size_t count) const {
        if (first + count > t_) throw ShapeError("frame slice out of range");
        const std::size_t per_frame = h_ * w_ * c_;
        std::vector<double> px(pixels_.begin() + static_cast<std::ptrdiff_t>(first * per_frame),
                               pixels_.begin() +
                                   static_cast<std::ptrdiff_t>((first + count) * per_frame));
        VideoTensor v;
        v.t_ = count;
        v.h_ = h_;
        v.w_ = w_;
        v.c_ = c_;
        v.pixels_ = std::move(px);
        return v;
    }

    friend bool operator==(const VideoTensor&, const VideoTensor&) = default;

private:
    void validate_shape() const {
        if (c_ != 1 && c_ != 3) throw ShapeError("video must have 1 or 3 channels");
        if (t_ == 0 || h_ == 0 || w_ == 0) throw ShapeError("video dimensions must be positive");
    }

    std::size_t t_ = 0, h_ = 0, w_ = 0, c_ = 1;
    std::vector<double> pixels_;
};

/// Cube size used to tile a video: w x h pixels over d frames.
struct BlockSpec {
    std::size_t w = 3;
    std::size_t h = 3;
    std::size_t d = 3;

    void validate() const {
        if (w < 1 || h < 1 || d < 1) throw ConfigError("block dimensions must be >= 1");
    }

    std::string to_string() const {
        return std::to_string(w) + "x" + std::to_string(h) + "x" + std::to_string(d);
    }

    friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

} // namespace ddm::scsp

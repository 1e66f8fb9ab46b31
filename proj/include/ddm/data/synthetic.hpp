#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "ddm/data/corpus.hpp"
#include "ddm/error.hpp"
#include "ddm/numeric/rng.hpp"

namespace ddm::data {

struct SynthSpec {
    int classes = 3;
    int per_class = 10;
    std::size_t frames = 30;
    std::size_t height = 24;
    std::size_t width = 24;
    std::size_t channels = 1;
    std::uint64_t seed = 1;
    double amplitude = 0.3;
    double noise = 0.03;
    double spatial_frequency = 1.0 / 6.0; ///< cycles per pixel

    void validate() const {
        if (classes < 1 || per_class < 1) throw ConfigError("synthetic corpus needs >= 1 class and video");
        if (channels != 1 && channels != 3) throw ConfigError("synthetic corpus channels must be 1 or 3");
        if (frames == 0 || height == 0 || width == 0) throw ConfigError("synthetic video dims must be >= 1");
    }
};

/// Grating orientation (radians) of class k, 0-based.
inline double class_orientation(int k, int classes) noexcept {
    return std::numbers::pi * static_cast<double>(k) / static_cast<double>(classes);
}

/// Drift speed of class k in cycles per frame.
inline double class_speed(int k) noexcept { return 0.05 + 0.04 * static_cast<double>(k); }

/// Drifting sinusoidal gratings: class k has its own orientation and speed; each video
/// gets a random phase, a ±10 % amplitude jitter and Gaussian pixel noise. Intensities are
/// clamped to [0, 1] and quantized to 8 bits so the corpus survives an RVT1 round trip.
inline LabeledCorpus generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    numeric::RngStream root(spec.seed);
    LabeledCorpus c;
    c.num_classes = spec.classes;
    c.provenance = "synthetic classes=" + std::to_string(spec.classes) +
                   " per_class=" + std::to_string(spec.per_class) + " seed=" + std::to_string(spec.seed);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int k = 0; k < spec.classes; ++k) {
        const double theta = class_orientation(k, spec.classes);
        const double speed = class_speed(k);
        const double kx = std::cos(theta) * spec.spatial_frequency;
        const double ky = std::sin(theta) * spec.spatial_frequency;
        for (int v = 0; v < spec.per_class; ++v) {
            numeric::RngStream rng = root.derive(static_cast<std::uint64_t>(k) * 100003u + static_cast<std::uint64_t>(v));
            const double phase = rng.uniform(0.0, two_pi);
            const double amp = spec.amplitude * rng.uniform(0.9, 1.1);
            VideoTensor video(spec.frames, spec.height, spec.width, spec.channels);
            for (std::size_t t = 0; t < spec.frames; ++t)
                for (std::size_t y = 0; y < spec.height; ++y)
                    for (std::size_t x = 0; x < spec.width; ++x) {
                        const double s = std::sin(two_pi * (kx * x + ky * y - speed * t) + phase);
                        for (std::size_t ch = 0; ch < spec.channels; ++ch) {
                            const double gain = 1.0 - 0.2 * static_cast<double>(ch);
                            const double val = 0.5 + gain * amp * s + spec.noise * rng.normal();
                            video.at(t, y, x, ch) = std::clamp(val, 0.0, 1.0);
                        }
                    }
            c.items.push_back({"c" + std::to_string(k + 1) + "_v" + std::to_string(v), quantized(video), k + 1});
        }
    }
    return c;
}

/// Dominant spatial-gradient orientation in [0, π), from the doubled-angle average of the
/// central-difference gradients of channel 0 over all frames.
inline double gradient_orientation(const VideoTensor& v) {
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t t = 0; t < v.frames(); ++t)
        for (std::size_t y = 1; y + 1 < v.height(); ++y)
            for (std::size_t x = 1; x + 1 < v.width(); ++x) {
                const double gx = 0.5 * (v.at(t, y, x + 1) - v.at(t, y, x - 1));
                const double gy = 0.5 * (v.at(t, y + 1, x) - v.at(t, y - 1, x));
                sxx += gx * gx;
                syy += gy * gy;
                sxy += gx * gy;
            }
    double a = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    if (a < 0.0) a += std::numbers::pi;
    return a;
}

} // namespace ddm::data

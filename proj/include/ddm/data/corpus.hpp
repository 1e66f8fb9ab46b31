#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/io/binary.hpp"
#include "ddm/scsp/video.hpp"

namespace ddm::data {

using scsp::VideoTensor;

// RVT1: 8-byte magic, u32 LE T, H, W, C, then T*H*W*C bytes ordered t, y, x, channel.
// Bytes map to intensities v / 255.
inline constexpr std::string_view video_magic{"RVT1\0\0\0\0", 8};

inline std::uint8_t quantize(double v) noexcept {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline io::Bytes encode_video(const VideoTensor& v) {
    io::Bytes out(video_magic.begin(), video_magic.end());
    io::put_u32(out, static_cast<std::uint32_t>(v.frames()));
    io::put_u32(out, static_cast<std::uint32_t>(v.height()));
    io::put_u32(out, static_cast<std::uint32_t>(v.width()));
    io::put_u32(out, static_cast<std::uint32_t>(v.channels()));
    out.reserve(out.size() + v.pixels().size());
    for (double p : v.pixels()) out.push_back(quantize(p));
    return out;
}

inline VideoTensor decode_video(std::span<const std::uint8_t> bytes, const std::string& source) {
    io::Reader in(bytes, source);
    in.expect_magic(video_magic);
    const std::size_t t = in.u32(), h = in.u32(), w = in.u32(), c = in.u32();
    if (t == 0 || h == 0 || w == 0 || (c != 1 && c != 3))
        throw DataError(source + ": malformed RVT1 header (" + std::to_string(t) + "x" +
                        std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c) + ")");
    auto raw = in.take(t * h * w * c);
    in.expect_end();
    std::vector<double> px(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) px[i] = raw[i] / 255.0;
    return VideoTensor(t, h, w, c, std::move(px));
}

inline void write_video(const std::filesystem::path& path, const VideoTensor& v) {
    io::write_file(path, encode_video(v));
}

inline VideoTensor read_video(const std::filesystem::path& path) {
    return decode_video(io::read_file(path), path.string());
}

/// Intensities as they will read back from an RVT1 file.
inline VideoTensor quantized(const VideoTensor& v) {
    std::vector<double> px(v.pixels().size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize(v.pixels()[i]) / 255.0;
    return VideoTensor(v.frames(), v.height(), v.width(), v.channels(), std::move(px));
}

struct CorpusItem {
    std::string id;             ///< manifest path as written, or a generated name
    VideoTensor video;
    int label = 0;              ///< 1 .. C
};

struct LabeledCorpus {
    std::vector<CorpusItem> items;
    int num_classes = 0;
    std::string provenance; ///< manifest path or generator description

    std::size_t size() const noexcept { return items.size(); }

    std::vector<int> labels() const {
        std::set<int> s;
        for (const auto& i : items) s.insert(i.label);
        return {s.begin(), s.end()};
    }
};

/// Checks labels cover exactly 1..C for the C distinct labels present.
inline void validate_labels(const LabeledCorpus& c, const std::string& source) {
    const auto labels = c.labels();
    for (const auto& item : c.items) {
        if (item.label < 1 || item.label > static_cast<int>(labels.size()))
            throw DataError(source + ": label " + std::to_string(item.label) + " of '" + item.id +
                            "' is outside 1.." + std::to_string(labels.size()));
    }
}

struct ManifestEntry {
    std::string path;
    int label = 0;
};

/// `path<TAB>label` per line; blank lines and `#` comments ignored.
inline std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::string& source) {
    std::vector<ManifestEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(source + ":" + std::to_string(lineno) + ": expected 'path<TAB>label'");
        ManifestEntry e{line.substr(0, tab), 0};
        const std::string label = line.substr(tab + 1);
        try {
            std::size_t used = 0;
            e.label = std::stoi(label, &used);
            if (label.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("junk");
        } catch (const std::exception&) {
            throw DataError(source + ":" + std::to_string(lineno) + ": bad label '" + label + "'");
        }
        out.push_back(std::move(e));
    }
    return out;
}

inline LabeledCorpus load_corpus(const std::filesystem::path& manifest) {
    std::ifstream f(manifest);
    if (!f) throw ConfigError("cannot open manifest '" + manifest.string() + "'");
    const auto entries = parse_manifest(f, manifest.string());
    if (entries.empty()) throw DataError("manifest '" + manifest.string() + "' lists no videos");
    LabeledCorpus c;
    c.provenance = manifest.string();
    const auto base = manifest.parent_path();
    for (const auto& e : entries) {
        const std::filesystem::path p = std::filesystem::path(e.path).is_absolute() ? std::filesystem::path(e.path) : base / e.path;
        if (!std::filesystem::exists(p))
            throw DataError("manifest '" + manifest.string() + "' references missing file '" + p.string() + "'");
        c.items.push_back({e.path, read_video(p), e.label});
    }
    validate_labels(c, manifest.string());
    c.num_classes = static_cast<int>(c.labels().size());
    return c;
}

/// Writes every item as <dir>/<id>.rvt plus <dir>/manifest.tsv; returns the manifest path.
/// Item ids become file stems, so they must be plain names.
inline std::filesystem::path write_corpus(const std::filesystem::path& dir, const LabeledCorpus& c) {
    std::filesystem::create_directories(dir);
    std::ostringstream manifest;
    manifest << "# " << c.provenance << "\n";
    for (const auto& item : c.items) {
        const std::string name = item.id + ".rvt";
        write_video(dir / name, item.video);
        manifest << name << '\t' << item.label << '\n';
    }
    const auto path = dir / "manifest.tsv";
    io::write_text(path, manifest.str());
    return path;
}

} // namespace ddm::data

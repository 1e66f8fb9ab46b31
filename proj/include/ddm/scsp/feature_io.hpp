#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ddm/io/binary.hpp"
#include "ddm/scsp/dictionary.hpp"
#include "ddm/scsp/sequence.hpp"

// SCSPFTv1 container: 8-byte magic, u64 LE header length, JSON header, LE float64 payload.
// "kind" in the header selects the payload: "sequence" holds frames x frame_dim values
// row-major; "dictionary" holds one atom per row (N x rows).

namespace ddm::scsp {

inline constexpr std::string_view feature_magic = "SCSPFTv1";

struct SequenceFile {
    ScspSequence sequence;
    io::json meta = io::json::object();
};

struct DictionaryFile {
    Dictionary dictionary;
    io::json meta = io::json::object();
};

inline io::Bytes encode_sequence(const ScspSequence& seq, const io::json& meta = io::json::object()) {
    io::json h;
    h["format"] = std::string(feature_magic);
    h["kind"] = "sequence";
    h["video_id"] = seq.video_id;
    h["label"] = seq.label;
    h["frames"] = seq.length();
    h["frame_dim"] = seq.frame_dim();
    h["meta"] = meta;
    io::Bytes out;
    io::put_header(out, feature_magic, h);
    io::put_f64s(out, seq.frames.values());
    return out;
}

inline io::Bytes encode_dictionary(const Dictionary& dict, const io::json& meta = io::json::object()) {
    io::json h;
    h["format"] = std::string(feature_magic);
    h["kind"] = "dictionary";
    h["rows"] = dict.feature_dim();
    h["cols"] = dict.size();
    h["segment_length"] = dict.segment_length();
    const auto& b = dict.block_spec();
    h["block"] = {b.w, b.h, b.d};
    io::json prov = io::json::array();
    for (const auto& p : dict.provenance()) prov.push_back({p.video_id, p.segment});
    h["provenance"] = prov;
    h["meta"] = meta;
    io::Bytes out;
    io::put_header(out, feature_magic, h);
    io::put_f64s(out, dict.atoms().values());
    return out;
}

inline std::string feature_kind(std::span<const std::uint8_t> bytes, const std::string& source) {
    io::Reader in(bytes, source);
    const auto h = io::read_header(in, feature_magic);
    return io::header_field<std::string>(h, "kind", source);
}

inline SequenceFile decode_sequence(std::span<const std::uint8_t> bytes, const std::string& source) {
    io::Reader in(bytes, source);
    const auto h = io::read_header(in, feature_magic);
    if (io::header_field<std::string>(h, "kind", source) != "sequence")
        throw DataError(source + ": not a feature-sequence file");
    const auto frames = io::header_field<std::size_t>(h, "frames", source);
    const auto dim = io::header_field<std::size_t>(h, "frame_dim", source);
    SequenceFile f;
    f.sequence.video_id = io::header_field<std::string>(h, "video_id", source);
    f.sequence.label = io::header_field<int>(h, "label", source);
    f.sequence.frames = numeric::Matrix(frames, dim, in.f64s(frames * dim));
    f.meta = h.value("meta", io::json::object());
    in.expect_end();
    return f;
}

inline DictionaryFile decode_dictionary(std::span<const std::uint8_t> bytes, const std::string& source) {
    io::Reader in(bytes, source);
    const auto h = io::read_header(in, feature_magic);
    if (io::header_field<std::string>(h, "kind", source) != "dictionary")
        throw DataError(source + ": not a dictionary file");
    const auto rows = io::header_field<std::size_t>(h, "rows", source);
    const auto cols = io::header_field<std::size_t>(h, "cols", source);
    const auto block = io::header_field<std::vector<std::size_t>>(h, "block", source);
    if (block.size() != 3) throw DataError(source + ": block spec must have 3 entries");
    std::vector<AtomSource> prov;
    for (const auto& p : h.at("provenance")) prov.push_back({p.at(0).get<std::string>(), p.at(1).get<std::size_t>()});
    DictionaryFile f{Dictionary(Matrix(cols, rows, in.f64s(rows * cols)), std::move(prov),
                                io::header_field<std::size_t>(h, "segment_length", source),
                                BlockSpec{block[0], block[1], block[2]}),
                     h.value("meta", io::json::object())};
    in.expect_end();
    return f;
}

inline void write_sequence(const std::filesystem::path& path, const ScspSequence& seq,
                           const io::json& meta = io::json::object()) {
    io::write_file(path, encode_sequence(seq, meta));
}

inline SequenceFile read_sequence(const std::filesystem::path& path) {
    return decode_sequence(io::read_file(path), path.string());
}

inline void write_dictionary(const std::filesystem::path& path, const Dictionary& dict,
                             const io::json& meta = io::json::object()) {
    io::write_file(path, encode_dictionary(dict, meta));
}

inline DictionaryFile read_dictionary(const std::filesystem::path& path) {
    return decode_dictionary(io::read_file(path), path.string());
}

} // namespace ddm::scsp

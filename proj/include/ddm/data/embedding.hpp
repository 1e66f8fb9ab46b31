#pragma once

#include <charconv>
#include <span>
#include <string>

#include "ddm/scsp/sequence.hpp"

namespace ddm::data {

/// One row per video: id, label, then every value of its flattened feature sequence.
inline std::string embedding_csv(std::span<const scsp::ScspSequence> seqs) {
    std::string out = "video_id,label,values...\n";
    char buf[32];
    for (const auto& s : seqs) {
        out += s.video_id + "," + std::to_string(s.label);
        for (double v : s.frames.values()) {
            const auto r = std::to_chars(buf, buf + sizeof buf, v);
            out += ',';
            out.append(buf, r.ptr);
        }
        out += '\n';
    }
    return out;
}

} // namespace ddm::data

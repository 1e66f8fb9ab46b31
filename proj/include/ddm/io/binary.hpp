#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ddm/error.hpp"

namespace ddm::io {

using json = nlohmann::json;
using Bytes = std::vector<std::uint8_t>;

inline void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(Bytes& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(Bytes& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_f64s(Bytes& out, std::span<const double> vs) {
    out.reserve(out.size() + 8 * vs.size());
    for (double v : vs) put_f64(out, v);
}

/// Sequential little-endian reader over an in-memory buffer.
class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::string source)
        : bytes_(bytes), source_(std::move(source)) {}

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    std::span<const std::uint8_t> take(std::size_t n) {
        if (remaining() < n) {
            throw DataError(source_ + ": truncated file (needed " + std::to_string(n) +
                            " bytes at offset " + std::to_string(pos_) + ")");
        }
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::uint32_t u32() {
        auto s = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[i]) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        auto s = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::vector<double> f64s(std::size_t n) {
        if (remaining() / 8 < n) take(8 * n); // throws with a useful message
        std::vector<double> out(n);
        for (auto& v : out) v = f64();
        return out;
    }

    void expect_magic(std::string_view magic) {
        auto s = take(magic.size());
        if (std::memcmp(s.data(), magic.data(), magic.size()) != 0) {
            throw DataError(source_ + ": bad magic, expected '" + printable(magic) + "'");
        }
    }

    void expect_end() const {
        if (remaining() != 0) {
            throw DataError(source_ + ": " + std::to_string(remaining()) +
                            " trailing bytes after payload");
        }
    }

    const std::string& source() const noexcept { return source_; }

private:
    static std::string printable(std::string_view s) {
        std::string out;
        for (char c : s) out += (c >= 32 && c < 127) ? c : '.';
        return out;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::string source_;
};

/// Magic, u64 length-prefixed JSON text header. Payload follows.
inline void put_header(Bytes& out, std::string_view magic, const json& header) {
    out.insert(out.end(), magic.begin(), magic.end());
    const std::string text = header.dump();
    put_u64(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
}

inline json read_header(Reader& in, std::string_view magic) {
    in.expect_magic(magic);
    const std::uint64_t len = in.u64();
    if (len > in.remaining()) throw DataError(in.source() + ": header length exceeds file size");
    auto s = in.take(static_cast<std::size_t>(len));
    try {
        return json::parse(s.begin(), s.end());
    } catch (const json::exception& e) {
        throw DataError(in.source() + ": malformed header: " + e.what());
    }
}

inline Bytes read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path.string() + "'");
    return Bytes(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write '" + path.string() + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("write failed for '" + path.string() + "'");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

/// True when the file starts with the given magic bytes.
inline bool has_magic(const std::filesystem::path& path, std::string_view magic) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    std::string head(magic.size(), '\0');
    f.read(head.data(), static_cast<std::streamsize>(head.size()));
    return f.gcount() == static_cast<std::streamsize>(magic.size()) && head == magic;
}

template <typename T>
T header_field(const json& h, const char* key, const std::string& source) {
    if (!h.contains(key)) throw DataError(source + ": header missing '" + key + "'");
    try {
        return h.at(key).get<T>();
    } catch (const json::exception& e) {
        throw DataError(source + ": header field '" + key + "': " + e.what());
    }
}

} // namespace ddm::io

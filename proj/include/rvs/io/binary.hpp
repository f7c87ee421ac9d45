#pragma once

// Little-endian byte encoding shared by the dataset and checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>

#include "rvs/common.hpp"

namespace rvs::io {

class BinaryWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
    }

    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void f64s(std::span<const double> values) {
        for (double v : values) f64(v);
    }

    void str(std::string_view s) {
        u64(s.size());
        buf_.append(s);
    }

    void raw(std::string_view bytes) { buf_.append(bytes); }

    const std::string& bytes() const noexcept { return buf_; }

private:
    std::string buf_;
};

/// Bounds-checked reader. Every failure is a ParseError carrying the byte offset.
class BinaryReader {
public:
    explicit BinaryReader(std::string_view bytes) : bytes_(bytes) {}

    std::size_t offset() const noexcept { return pos_; }
    bool at_end() const noexcept { return pos_ == bytes_.size(); }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    void expect_magic(std::string_view magic, std::string_view what) {
        if (remaining() < magic.size() || bytes_.substr(pos_, magic.size()) != magic) {
            throw ParseError("not a " + std::string(what) + " file: bad magic", 0, pos_);
        }
        pos_ += magic.size();
    }

    std::uint8_t u8() {
        need(1, "u8");
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

    std::uint32_t u32() {
        need(4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8, "u64");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    void f64s(std::span<double> out) {
        need(out.size() * 8, "f64 array");
        for (double& v : out) v = f64();
    }

    std::string str(std::size_t max_len = std::size_t{1} << 30) {
        const std::uint64_t n = u64();
        if (n > max_len) throw ParseError("string length out of range", 0, pos_ - 8);
        need(n, "string");
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }

    /// Length prefix for an element count; rejects counts the remaining bytes cannot hold.
    std::uint64_t count(std::size_t min_bytes_per_item, std::string_view what) {
        const std::size_t at = pos_;
        const std::uint64_t n = u64();
        if (min_bytes_per_item > 0 && n > remaining() / min_bytes_per_item) {
            throw ParseError("truncated or corrupt " + std::string(what) + " count", 0, at);
        }
        return n;
    }

private:
    void need(std::size_t n, std::string_view what) {
        if (remaining() < n) {
            throw ParseError("unexpected end of data reading " + std::string(what), 0, pos_);
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return data;
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

}  // namespace rvs::io

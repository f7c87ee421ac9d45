#pragma once

// Shared error types and random-stream helpers.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rvs {

inline constexpr std::string_view kVersion = "0.1.0";

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or a request the component cannot satisfy (CLI exit code 2).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Filesystem failures (CLI exit code 3).
class IoError : public Error {
public:
    using Error::Error;
};

/// Non-finite values reached the optimizer or the loss (CLI exit code 4).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed dataset or checkpoint contents. `line` is 1-based for text formats,
/// `offset` is a byte offset for binary formats; the unused one is zero.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t offset)
        : Error(what + location(line, offset)), line_(line), offset_(offset) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    static std::string location(std::size_t line, std::size_t offset) {
        if (line > 0) return " (line " + std::to_string(line) + ")";
        return " (byte offset " + std::to_string(offset) + ")";
    }
    std::size_t line_;
    std::size_t offset_;
};

/// A dataset failed a structural audit (e.g. contains a forbidden path).
class AuditError : public Error {
public:
    using Error::Error;
};

using Rng = std::mt19937_64;

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed-splitting rule used everywhere a sub-stream is needed:
/// splitmix64(seed XOR fnv1a(tag)). Streams with different tags are independent.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    return splitmix64(seed ^ fnv1a(tag));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
    return splitmix64(derive_seed(seed, tag) + splitmix64(index));
}

inline Rng make_rng(std::uint64_t seed, std::string_view tag) { return Rng{derive_seed(seed, tag)}; }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline bool all_finite(const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(data[i])) return false;
    }
    return true;
}

}  // namespace rvs

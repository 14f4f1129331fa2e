#pragma once

// Deterministic in-process stand-ins for real compressors, so the whole pipeline runs without external binaries.
//
//   copy         stores the raw bytes unchanged.
//   truncate:K   keeps the K most significant bits of every value (K a multiple of 8); stores K bits/value.
//   truncate     picks the smallest K whose truncation error provably meets the requested bound.
//   noise        stores x + u with u uniform in [-eb, eb], clamped so the bound holds after rounding.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zqual/dataset.hpp"
#include "zqual/error.hpp"
#include "zqual/metrics.hpp"

namespace zqual::mock {

struct CodecContext {
    DatasetDescriptor descriptor;
    ErrorBoundSpec bound;
    double eb_abs = 0;
    double value_range = 0;
};

namespace detail {

inline std::size_t exponent_bits(Precision p) { return p == Precision::single ? 8 : 11; }
inline std::size_t mantissa_bits(Precision p) { return p == Precision::single ? 23 : 52; }

inline std::uint64_t to_bits(double v, Precision p) {
    if (p == Precision::single) return std::bit_cast<std::uint32_t>(static_cast<float>(v));
    return std::bit_cast<std::uint64_t>(v);
}

inline double from_bits(std::uint64_t bits, Precision p) {
    if (p == Precision::single) return std::bit_cast<float>(static_cast<std::uint32_t>(bits));
    return std::bit_cast<double>(bits);
}

}  // namespace detail

/// Upper bound on |x - truncate_K(x)| for data whose largest magnitude is max_abs. Zero for the full width.
inline double truncation_implied_bound(double max_abs, std::size_t kept_bits, Precision p) {
    const std::size_t width = precision_bytes(p) * 8;
    if (kept_bits >= width || max_abs == 0) return 0;
    int ex = 0;
    std::frexp(max_abs, &ex);
    const int top = ex - 1;  // floor(log2(max_abs))
    const auto m = static_cast<long>(kept_bits) - 1 - static_cast<long>(detail::exponent_bits(p));
    if (m < 0) return std::ldexp(1.0, top + 1);
    return std::ldexp(1.0, top - static_cast<int>(m));
}

/// Smallest multiple of 8 bits whose implied bound does not exceed eb_abs.
inline std::size_t adaptive_truncation_bits(double max_abs, double eb_abs, Precision p) {
    const std::size_t width = precision_bytes(p) * 8;
    for (std::size_t k = 8; k < width; k += 8)
        if (truncation_implied_bound(max_abs, k, p) <= eb_abs) return k;
    return width;
}

inline double max_magnitude(std::span<const double> v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline std::vector<unsigned char> truncate_encode(std::span<const double> values, std::size_t kept_bits, Precision p) {
    const std::size_t width = precision_bytes(p);
    const std::size_t keep = kept_bits / 8;
    std::vector<unsigned char> out;
    out.reserve(values.size() * keep);
    for (double v : values) {
        const std::uint64_t bits = detail::to_bits(v, p);
        for (std::size_t b = 0; b < keep; ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * (width - 1 - b))));
    }
    return out;
}

inline std::vector<double> truncate_decode(std::span<const unsigned char> bytes, std::size_t n, Precision p) {
    const std::size_t width = precision_bytes(p);
    if (n == 0 || bytes.size() % n != 0 || bytes.size() / n == 0 || bytes.size() / n > width)
        throw DataError("truncate mock: compressed stream size " + std::to_string(bytes.size()) +
                        " does not fit " + std::to_string(n) + " values");
    const std::size_t keep = bytes.size() / n;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (std::size_t b = 0; b < keep; ++b)
            bits |= static_cast<std::uint64_t>(bytes[i * keep + b]) << (8 * (width - 1 - b));
        out[i] = detail::from_bits(bits, p);
    }
    return out;
}

/// splitmix64 stream; fixed seed keeps the noise mock reproducible.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

inline constexpr std::uint64_t kNoiseSeed = 0x5A5A'2017'C0DE'0001ULL;

/// x + u with u ~ U[-eb_abs, eb_abs]; every reconstructed value (after narrowing) satisfies the bound.
inline std::vector<double> add_bounded_noise(std::span<const double> values, const CodecContext& ctx) {
    SplitMix64 rng(kNoiseSeed);
    const Precision p = ctx.descriptor.precision;
    auto narrow = [p](double v) { return p == Precision::single ? static_cast<double>(static_cast<float>(v)) : v; };
    auto within = [&](double x, double y) {
        const double e = std::abs(x - y);
        if (ctx.bound.kind == BoundKind::value_range_relative && ctx.value_range > 0)
            return e <= ctx.eb_abs && e / ctx.value_range <= ctx.bound.magnitude;
        return e <= ctx.eb_abs;
    };
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = values[i];
        double y = narrow(x + (2 * rng.uniform() - 1) * ctx.eb_abs);
        // Step back toward x one representable value at a time if rounding pushed past the bound.
        while (!within(x, y)) {
            y = p == Precision::single
                    ? static_cast<double>(std::nextafter(static_cast<float>(y), static_cast<float>(x)))
                    : std::nextafter(y, x);
        }
        out[i] = y;
    }
    return out;
}

enum class Direction { compress, decompress };

/// Runs the named codec on files. `codec` is the template text after the builtin prefix.
inline void run_codec(std::string_view codec, Direction dir, const std::filesystem::path& input,
                      const std::filesystem::path& output, const CodecContext& ctx) {
    const auto& d = ctx.descriptor;
    if (codec == "copy") {
        write_file_bytes(output, read_file_bytes(input));
        return;
    }
    if (codec == "noise") {
        if (dir == Direction::decompress) {
            write_file_bytes(output, read_file_bytes(input));
            return;
        }
        const auto values = decode_values(read_file_bytes(input), d);
        write_file_bytes(output, encode_values(add_bounded_noise(values, ctx), d.precision, d.endianness));
        return;
    }
    if (codec == "truncate" || codec.starts_with("truncate:")) {
        if (dir == Direction::decompress) {
            const auto values = truncate_decode(read_file_bytes(input), d.element_count(), d.precision);
            write_file_bytes(output, encode_values(values, d.precision, d.endianness));
            return;
        }
        const auto values = decode_values(read_file_bytes(input), d);
        std::size_t bits = 0;
        if (codec == "truncate") {
            bits = adaptive_truncation_bits(max_magnitude(values), ctx.eb_abs, d.precision);
        } else {
            auto k = parse_integer(codec.substr(9));
            if (!k || *k <= 0 || *k % 8 != 0 || static_cast<std::size_t>(*k) > precision_bytes(d.precision) * 8)
                throw Error("truncate mock: kept bits must be a multiple of 8 within the value width");
            bits = static_cast<std::size_t>(*k);
        }
        write_file_bytes(output, truncate_encode(values, bits, d.precision));
        return;
    }
    throw Error("unknown builtin codec '" + std::string(codec) + "'");
}

inline bool is_known_codec(std::string_view codec) {
    return codec == "copy" || codec == "noise" || codec == "truncate" || codec.starts_with("truncate:");
}

}  // namespace zqual::mock

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "zqual/error.hpp"
#include "zqual/format.hpp"

namespace zqual {

enum class Precision { single, double_ };
enum class Endianness { little, big };
enum class BoundKind { absolute, value_range_relative };

inline std::size_t precision_bytes(Precision p) noexcept { return p == Precision::single ? 4 : 8; }

inline std::string to_string(Precision p) { return p == Precision::single ? "single" : "double"; }
inline std::string to_string(Endianness e) { return e == Endianness::little ? "little" : "big"; }
inline std::string to_string(BoundKind k) {
    return k == BoundKind::absolute ? "absolute" : "value_range_relative";
}

/// Short tag used in keys and file names: "abs" / "rel".
inline std::string short_tag(BoundKind k) { return k == BoundKind::absolute ? "abs" : "rel"; }

inline std::optional<Precision> parse_precision(std::string_view s) {
    if (s == "single" || s == "float" || s == "f32") return Precision::single;
    if (s == "double" || s == "f64") return Precision::double_;
    return std::nullopt;
}

inline std::optional<Endianness> parse_endianness(std::string_view s) {
    if (s == "little") return Endianness::little;
    if (s == "big") return Endianness::big;
    return std::nullopt;
}

inline std::optional<BoundKind> parse_bound_kind(std::string_view s) {
    if (s == "absolute" || s == "abs") return BoundKind::absolute;
    if (s == "value_range_relative" || s == "rel") return BoundKind::value_range_relative;
    return std::nullopt;
}

/// Requested error control for one compression: eb_abs in data units or eb_rel against the value range.
struct ErrorBoundSpec {
    BoundKind kind = BoundKind::value_range_relative;
    double magnitude = 1e-3;

    static ErrorBoundSpec absolute(double m) { return {BoundKind::absolute, m}; }
    static ErrorBoundSpec relative(double m) { return {BoundKind::value_range_relative, m}; }

    /// Absolute bound this spec resolves to on data with the given value range.
    [[nodiscard]] double to_absolute(double value_range) const {
        return kind == BoundKind::absolute ? magnitude : magnitude * value_range;
    }

    /// "rel:0.001" / "abs:0.5"; parse_bound() reads it back exactly.
    [[nodiscard]] std::string str() const { return short_tag(kind) + ":" + format_shortest(magnitude); }

    friend bool operator==(const ErrorBoundSpec&, const ErrorBoundSpec&) = default;
    friend auto operator<=>(const ErrorBoundSpec& a, const ErrorBoundSpec& b) {
        return std::tie(a.kind, a.magnitude) <=> std::tie(b.kind, b.magnitude);
    }
};

/// Parses "1e-3" (using default_kind), "rel:1e-3" or "abs:0.5".
inline std::optional<ErrorBoundSpec> parse_bound(std::string_view token,
                                                 BoundKind default_kind = BoundKind::value_range_relative) {
    token = trim(token);
    ErrorBoundSpec b{default_kind, 0};
    if (auto colon = token.find(':'); colon != std::string_view::npos) {
        auto kind = parse_bound_kind(token.substr(0, colon));
        if (!kind) return std::nullopt;
        b.kind = *kind;
        token = token.substr(colon + 1);
    }
    auto m = parse_double(token);
    if (!m || !(*m > 0) || std::isinf(*m)) return std::nullopt;
    b.magnitude = *m;
    return b;
}

/// Where a raw array lives and how to decode it. Dims are slowest-varying first.
struct DatasetDescriptor {
    std::string id;
    std::filesystem::path path;
    Precision precision = Precision::single;
    std::vector<std::size_t> dims;
    Endianness endianness = Endianness::little;
    std::string variable_name;
    /// When set, non-finite values are kept and skipped by the scalar statistics.
    bool allow_nonfinite = false;

    [[nodiscard]] std::size_t element_count() const {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
    }
    [[nodiscard]] std::size_t byte_size() const { return element_count() * precision_bytes(precision); }

    void validate() const {
        if (dims.empty() || dims.size() > 4)
            throw DataError("dataset '" + id + "': rank must be between 1 and 4");
        for (auto d : dims)
            if (d == 0) throw DataError("dataset '" + id + "': dimensions must be positive");
    }

    friend bool operator==(const DatasetDescriptor&, const DatasetDescriptor&) = default;
};

inline Endianness detect_host_endianness() noexcept {
    return std::endian::native == std::endian::little ? Endianness::little : Endianness::big;
}

namespace detail {

template <class T>
T byteswap(T v) noexcept {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
    return v;
}

template <class T>
void decode_into(const unsigned char* bytes, std::size_t n, bool swap, std::vector<double>& out) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        T v;
        std::memcpy(&v, bytes + i * sizeof(T), sizeof(T));
        if (swap) v = byteswap(v);
        out[i] = static_cast<double>(v);
    }
}

}  // namespace detail

/// An immutable, dimensioned array of reals in row-major order.
class Dataset {
public:
    Dataset() = default;

    Dataset(DatasetDescriptor descriptor, std::vector<double> values)
        : descriptor_(std::move(descriptor)), values_(std::move(values)) {
        descriptor_.validate();
        if (values_.size() != descriptor_.element_count())
            throw DataError("dataset '" + descriptor_.id + "': " + std::to_string(values_.size()) +
                            " values do not match dims (" + std::to_string(descriptor_.element_count()) +
                            ")");
        for (double v : values_) {
            if (!std::isfinite(v)) {
                if (!descriptor_.allow_nonfinite)
                    throw DataError("dataset '" + descriptor_.id + "': non-finite value encountered");
                has_nonfinite_ = true;
            }
        }
    }

    /// 1-D convenience constructor for in-memory series.
    static Dataset from_values(std::vector<double> values, Precision p = Precision::double_,
                               std::string id = "memory") {
        DatasetDescriptor d;
        d.id = std::move(id);
        d.precision = p;
        d.dims = {values.size()};
        return Dataset(std::move(d), std::move(values));
    }

    static Dataset from_values(std::vector<double> values, std::vector<std::size_t> dims,
                               Precision p = Precision::double_, std::string id = "memory") {
        DatasetDescriptor d;
        d.id = std::move(id);
        d.precision = p;
        d.dims = std::move(dims);
        return Dataset(std::move(d), std::move(values));
    }

    [[nodiscard]] const DatasetDescriptor& descriptor() const noexcept { return descriptor_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<std::size_t>& dims() const noexcept { return descriptor_.dims; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::size_t rank() const noexcept { return descriptor_.dims.size(); }
    [[nodiscard]] bool has_nonfinite() const noexcept { return has_nonfinite_; }

    /// Throws for analyses that have no meaning on masked (non-finite) points.
    void require_finite(std::string_view what) const {
        if (has_nonfinite_)
            throw DataError(std::string(what) + " requires a dataset without non-finite values");
    }

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.descriptor_ == b.descriptor_ &&
               std::equal(a.values_.begin(), a.values_.end(), b.values_.begin(), b.values_.end(),
                          [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; });
    }

private:
    DatasetDescriptor descriptor_;
    std::vector<double> values_;
    bool has_nonfinite_ = false;
};

/// Decodes raw bytes according to the descriptor (no header, file order).
inline std::vector<double> decode_values(std::span<const unsigned char> bytes, const DatasetDescriptor& d) {
    if (bytes.size() != d.byte_size())
        throw DataError("dataset '" + d.id + "': size mismatch, expected " + std::to_string(d.byte_size()) +
                        " bytes for dims x precision, got " + std::to_string(bytes.size()));
    const bool swap = d.endianness != detect_host_endianness();
    std::vector<double> out;
    if (d.precision == Precision::single)
        detail::decode_into<float>(bytes.data(), d.element_count(), swap, out);
    else
        detail::decode_into<double>(bytes.data(), d.element_count(), swap, out);
    return out;
}

/// Encodes values in the given precision and byte order. Values are narrowed to float for single.
inline std::vector<unsigned char> encode_values(std::span<const double> values, Precision p, Endianness e) {
    const bool swap = e != detect_host_endianness();
    const std::size_t w = precision_bytes(p);
    std::vector<unsigned char> out(values.size() * w);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (p == Precision::single) {
            float f = static_cast<float>(values[i]);
            if (swap) f = detail::byteswap(f);
            std::memcpy(out.data() + i * w, &f, w);
        } else {
            double v = values[i];
            if (swap) v = detail::byteswap(v);
            std::memcpy(out.data() + i * w, &v, w);
        }
    }
    return out;
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read file '" + path.string() + "'");
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    std::vector<unsigned char> bytes(size);
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
        throw DataError("cannot read file '" + path.string() + "'");
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("cannot write file '" + path.string() + "'");
}

inline Dataset load_dataset(const DatasetDescriptor& descriptor) {
    descriptor.validate();
    std::error_code ec;
    if (!std::filesystem::is_regular_file(descriptor.path, ec))
        throw DataError("dataset '" + descriptor.id + "': cannot read file '" + descriptor.path.string() + "'");
    const auto size = std::filesystem::file_size(descriptor.path, ec);
    if (ec) throw DataError("dataset '" + descriptor.id + "': cannot stat '" + descriptor.path.string() + "'");
    if (size != descriptor.byte_size())
        throw DataError("dataset '" + descriptor.id + "': size mismatch, expected " +
                        std::to_string(descriptor.byte_size()) + " bytes for dims x precision, file has " +
                        std::to_string(size));
    auto bytes = read_file_bytes(descriptor.path);
    return Dataset(descriptor, decode_values(bytes, descriptor));
}

/// Writes the dataset's values to `path` using the descriptor's precision and byte order.
inline void write_dataset(const std::filesystem::path& path, const Dataset& data) {
    const auto& d = data.descriptor();
    write_file_bytes(path, encode_values(data.values(), d.precision, d.endianness));
}

}  // namespace zqual

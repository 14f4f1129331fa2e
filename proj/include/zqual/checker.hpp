#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zqual/dataset.hpp"
#include "zqual/error.hpp"
#include "zqual/grid.hpp"
#include "zqual/metrics.hpp"
#include "zqual/properties.hpp"

namespace zqual {

/// Pointwise errors e_abs = x - x~ and e_rel = e_abs / R_X (absent when R_X = 0).
struct ErrorFields {
    std::vector<double> abs_errors;
    std::optional<std::vector<double>> rel_errors;
    double value_range = 0;
};

namespace detail {

inline void require_same_shape(const Dataset& orig, const Dataset& recon) {
    if (orig.dims() != recon.dims())
        throw DataError("shape mismatch between original '" + orig.descriptor().id + "' and reconstruction");
    if (orig.descriptor().precision != recon.descriptor().precision)
        throw DataError("precision mismatch between original and reconstruction");
}

}  // namespace detail

inline ErrorFields pointwise_errors(std::span<const double> orig, std::span<const double> recon) {
    if (orig.size() != recon.size())
        throw DataError("shape mismatch: " + std::to_string(orig.size()) + " vs " + std::to_string(recon.size()));
    ErrorFields f;
    f.value_range = value_range(orig);
    f.abs_errors.resize(orig.size());
    for (std::size_t i = 0; i < orig.size(); ++i) f.abs_errors[i] = orig[i] - recon[i];
    if (f.value_range > 0) {
        f.rel_errors.emplace(orig.size());
        for (std::size_t i = 0; i < orig.size(); ++i) (*f.rel_errors)[i] = f.abs_errors[i] / f.value_range;
    }
    return f;
}

inline ErrorFields pointwise_errors(const Dataset& orig, const Dataset& recon) {
    detail::require_same_shape(orig, recon);
    orig.require_finite("error analysis");
    recon.require_finite("error analysis");
    return pointwise_errors(orig.values(), recon.values());
}

struct BoundCheck {
    double max_abs = 0;
    std::optional<double> max_rel;
    bool satisfied = false;
};

/// Closed check: the largest error of the bound's kind must not exceed its magnitude.
inline BoundCheck check_bound(const ErrorFields& errors, const ErrorBoundSpec& bound) {
    BoundCheck c;
    for (double e : errors.abs_errors) c.max_abs = std::max(c.max_abs, std::abs(e));
    if (errors.rel_errors) {
        double m = 0;
        for (double e : *errors.rel_errors) m = std::max(m, std::abs(e));
        c.max_rel = m;
    }
    if (bound.kind == BoundKind::absolute) {
        c.satisfied = c.max_abs <= bound.magnitude;
    } else {
        if (!c.max_rel) throw UndefinedMetric("relative bound check on data with zero value range");
        c.satisfied = *c.max_rel <= bound.magnitude;
    }
    return c;
}

inline DistortionStats distortion_stats(const Dataset& orig, const Dataset& recon) {
    detail::require_same_shape(orig, recon);
    orig.require_finite("distortion");
    recon.require_finite("distortion");
    return distortion_stats(orig.values(), recon.values());
}

inline Histogram error_distribution(const ErrorFields& errors, std::size_t bins) {
    return distribution(errors.abs_errors, bins);
}

inline AutocorrSeries error_autocorrelation(const ErrorFields& errors, std::size_t max_lag) {
    return autocorrelation(errors.abs_errors, max_lag);
}

/// Compression ratio and bit rate of one compressed file.
struct SizeMetrics {
    std::size_t orig_bytes = 0;
    std::size_t comp_bytes = 0;
    std::size_t n = 0;
    double cr = 0;
    double br = 0;  ///< bits per value

    friend bool operator==(const SizeMetrics&, const SizeMetrics&) = default;
};

inline SizeMetrics size_metrics(std::size_t orig_bytes, std::size_t comp_bytes, std::size_t n, Precision precision) {
    (void)precision;
    if (comp_bytes == 0) throw DataError("compressed size is zero");
    if (orig_bytes == 0 || n == 0) throw DataError("original size and value count must be positive");
    SizeMetrics s{orig_bytes, comp_bytes, n, 0, 0};
    s.cr = static_cast<double>(orig_bytes) / static_cast<double>(comp_bytes);
    s.br = 8.0 * static_cast<double>(comp_bytes) / static_cast<double>(n);
    return s;
}

/// Population Pearson correlation between original and reconstruction.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("shape mismatch in Pearson correlation");
    if (x.empty()) throw DataError("Pearson correlation of empty series");
    const auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = x[i] - mx, b = y[i] - my;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    if (!(sxx > 0) || !(syy > 0)) throw UndefinedMetric("Pearson correlation undefined: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double pearson(const Dataset& orig, const Dataset& recon) {
    detail::require_same_shape(orig, recon);
    orig.require_finite("Pearson correlation");
    recon.require_finite("Pearson correlation");
    return pearson(orig.values(), recon.values());
}

/// The "five nines" acceptance level for correlation between original and reconstruction.
inline constexpr double kFiveNines = 0.99999;

inline bool meets_five_nines(double rho) noexcept { return rho >= kFiveNines; }

/// A derived field with its own shape.
struct Field {
    std::vector<std::size_t> dims;
    std::vector<double> values;
};

namespace detail {

inline void require_rank3(const Dataset& d, std::size_t min_extent, std::string_view what) {
    if (d.rank() != 3) throw DataError(std::string(what) + " needs a rank-3 dataset");
    for (auto e : d.dims())
        if (e < min_extent)
            throw DataError(std::string(what) + " needs every dimension >= " + std::to_string(min_extent));
    d.require_finite(what);
}

}  // namespace detail

/// Backward-difference divergence 3f - f(x-1) - f(y-1) - f(z-1) at every point with all three predecessors.
inline Field divergence_field(const Dataset& data) {
    detail::require_rank3(data, 2, "divergence");
    const auto& d = data.dims();
    const auto s = row_major_strides(d);
    const auto f = data.values();
    Field out{{d[0] - 1, d[1] - 1, d[2] - 1}, {}};
    out.values.reserve(product(out.dims));
    for_each_index({1, 1, 1}, out.dims, [&](const std::vector<std::size_t>& i) {
        const std::size_t o = flat_index(i, s);
        out.values.push_back(3 * f[o] - f[o - s[0]] - f[o - s[1]] - f[o - s[2]]);
    });
    return out;
}

/// Seven-point Laplacian on interior points.
inline Field laplacian_field(const Dataset& data) {
    detail::require_rank3(data, 3, "Laplacian");
    const auto& d = data.dims();
    const auto s = row_major_strides(d);
    const auto f = data.values();
    Field out{{d[0] - 2, d[1] - 2, d[2] - 2}, {}};
    out.values.reserve(product(out.dims));
    for_each_index({1, 1, 1}, out.dims, [&](const std::vector<std::size_t>& i) {
        const std::size_t o = flat_index(i, s);
        out.values.push_back(f[o - s[0]] + f[o + s[0]] + f[o - s[1]] + f[o + s[1]] + f[o - s[2]] + f[o + s[2]] -
                             6 * f[o]);
    });
    return out;
}

enum class DerivedKind { divergence, laplacian, partial1, partial2 };

inline std::string to_string(DerivedKind k) {
    switch (k) {
        case DerivedKind::divergence: return "divergence";
        case DerivedKind::laplacian: return "laplacian";
        case DerivedKind::partial1: return "partial1";
        case DerivedKind::partial2: return "partial2";
    }
    return "?";
}

inline std::optional<DerivedKind> parse_derived_kind(std::string_view s) {
    if (s == "divergence") return DerivedKind::divergence;
    if (s == "laplacian") return DerivedKind::laplacian;
    if (s == "partial1") return DerivedKind::partial1;
    if (s == "partial2") return DerivedKind::partial2;
    return std::nullopt;
}

inline Field derived_field(const Dataset& data, DerivedKind kind, std::size_t axis = 0) {
    switch (kind) {
        case DerivedKind::divergence: return divergence_field(data);
        case DerivedKind::laplacian: return laplacian_field(data);
        case DerivedKind::partial1:
        case DerivedKind::partial2: {
            auto r = smoothness(data, axis, kind == DerivedKind::partial1 ? 1 : 2);
            return {std::move(r.dims), std::move(r.field)};
        }
    }
    throw Error("unknown derived kind");
}

struct DerivedFieldComparison {
    DerivedKind kind = DerivedKind::laplacian;
    std::size_t axis = 0;
    DistortionStats stats;
};

/// Distortion between the derived fields of original and reconstruction; range from the original's field.
inline DerivedFieldComparison compare_derived(const Dataset& orig, const Dataset& recon, DerivedKind kind,
                                              std::size_t axis = 0) {
    detail::require_same_shape(orig, recon);
    const auto a = derived_field(orig, kind, axis);
    const auto b = derived_field(recon, kind, axis);
    return {kind, axis, distortion_stats(a.values, b.values)};
}

struct BreakEvenQuery {
    double data_bytes = 0;
    double bandwidth = 0;  ///< bytes / s
    double r_comp = 0;     ///< original bytes / s
    double r_decomp = 0;
    double cr = 0;

    void validate() const {
        if (!(data_bytes > 0 && bandwidth > 0 && r_comp > 0 && r_decomp > 0 && cr > 0))
            throw DataError("break-even parameters must all be strictly positive");
    }
};

struct BreakEvenResult {
    bool beneficial = false;
    double time_plain = 0;
    double time_compressed = 0;
    double r_overall = 0;
};

/// Compression pays off when BW / R_overall < (CR - 1) / CR, R_overall = R_c R_d / (R_c + R_d).
inline BreakEvenResult break_even(const BreakEvenQuery& q) {
    q.validate();
    BreakEvenResult r;
    r.r_overall = q.r_comp * q.r_decomp / (q.r_comp + q.r_decomp);
    r.beneficial = q.bandwidth / r.r_overall < (q.cr - 1) / q.cr;
    r.time_plain = q.data_bytes / q.bandwidth;
    r.time_compressed = q.data_bytes / (q.cr * q.bandwidth) + q.data_bytes / q.r_comp + q.data_bytes / q.r_decomp;
    return r;
}

}  // namespace zqual

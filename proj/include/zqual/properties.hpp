#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "zqual/dataset.hpp"
#include "zqual/error.hpp"
#include "zqual/grid.hpp"
#include "zqual/spectral.hpp"

namespace zqual {

struct BasicStats {
    double min = 0;
    double max = 0;
    double avg = 0;
    double range = 0;

    friend bool operator==(const BasicStats&, const BasicStats&) = default;
};

namespace detail {

/// Copy of the finite values; the whole series when nothing is masked.
inline std::vector<double> finite_values(const Dataset& data) {
    std::vector<double> v;
    v.reserve(data.size());
    for (double x : data.values())
        if (std::isfinite(x)) v.push_back(x);
    return v;
}

inline std::span<const double> finite_view(const Dataset& data, std::vector<double>& storage) {
    if (!data.has_nonfinite()) return data.values();
    storage = finite_values(data);
    return storage;
}

}  // namespace detail

inline BasicStats basic_stats(std::span<const double> values) {
    if (values.empty()) throw DataError("basic statistics of an empty dataset");
    BasicStats s;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    s.range = s.max - s.min;
    double sum = 0;
    for (double v : values) sum += v;
    s.avg = std::clamp(sum / static_cast<double>(values.size()), s.min, s.max);
    return s;
}

inline BasicStats basic_stats(const Dataset& data) {
    std::vector<double> tmp;
    return basic_stats(detail::finite_view(data, tmp));
}

/// Equal-width histogram over [min, max]. `edges` holds bin lower bounds; the max value lands in the last bin.
struct Histogram {
    std::size_t bin_count = 0;
    double min = 0;
    double max = 0;
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::vector<double> pdf;
    std::vector<double> cdf;

    friend bool operator==(const Histogram&, const Histogram&) = default;
};

inline Histogram distribution(std::span<const double> values, std::size_t bins) {
    if (bins < 2) throw DataError("histogram needs at least 2 bins");
    if (values.empty()) throw DataError("histogram of an empty dataset");
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    Histogram h;
    h.min = *lo;
    h.max = *hi;
    const double range = h.max - h.min;
    // Zero range: one bin holding everything.
    h.bin_count = range > 0 ? bins : 1;
    h.counts.assign(h.bin_count, 0);
    const double width = range > 0 ? range / static_cast<double>(bins) : 0;
    for (std::size_t i = 0; i < h.bin_count; ++i) h.edges.push_back(h.min + width * static_cast<double>(i));
    if (range > 0) {
        for (double v : values) {
            auto b = static_cast<std::size_t>((v - h.min) / width);
            h.counts[std::min(b, bins - 1)]++;
        }
    } else {
        h.counts[0] = values.size();
    }
    const auto n = static_cast<double>(values.size());
    h.pdf.resize(h.bin_count);
    h.cdf.resize(h.bin_count);
    std::size_t running = 0;
    for (std::size_t i = 0; i < h.bin_count; ++i) {
        h.pdf[i] = static_cast<double>(h.counts[i]) / n;
        running += h.counts[i];
        h.cdf[i] = static_cast<double>(running) / n;
    }
    return h;
}

inline Histogram distribution(const Dataset& data, std::size_t bins) {
    std::vector<double> tmp;
    return distribution(detail::finite_view(data, tmp), bins);
}

/// Shannon entropy (bits) of the values truncated to multiples of eb_abs: floor(x / eb_abs).
inline double entropy(std::span<const double> values, double eb_abs) {
    if (!(eb_abs > 0) || std::isinf(eb_abs)) throw DataError("entropy needs a positive absolute error bound");
    if (values.empty()) throw DataError("entropy of an empty dataset");
    std::vector<double> symbols(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) symbols[i] = std::floor(values[i] / eb_abs) + 0.0;
    std::sort(symbols.begin(), symbols.end());
    const auto n = static_cast<double>(symbols.size());
    double h = 0;
    for (std::size_t i = 0; i < symbols.size();) {
        std::size_t j = i + 1;
        while (j < symbols.size() && symbols[j] == symbols[i]) ++j;
        const double p = static_cast<double>(j - i) / n;
        h -= p * std::log2(p);
        i = j;
    }
    return h + 0.0;
}

inline double entropy(const Dataset& data, double eb_abs) {
    std::vector<double> tmp;
    return entropy(detail::finite_view(data, tmp), eb_abs);
}

/// Entropy per block tile. Tiles are ordered row-major; edge tiles may be smaller.
struct EntropyMap {
    std::vector<std::size_t> block_dims;
    std::vector<std::size_t> grid;  ///< tiles per axis
    std::vector<double> values;
    double eb_abs = 0;

    friend bool operator==(const EntropyMap&, const EntropyMap&) = default;
};

inline EntropyMap block_entropy(const Dataset& data, double eb_abs, const std::vector<std::size_t>& block_dims) {
    if (block_dims.size() != data.rank())
        throw DataError("block rank " + std::to_string(block_dims.size()) + " does not match dataset rank " +
                        std::to_string(data.rank()));
    for (std::size_t i = 0; i < block_dims.size(); ++i)
        if (block_dims[i] == 0 || block_dims[i] > data.dims()[i])
            throw DataError("block dimension " + std::to_string(i) + " must be in [1, " +
                            std::to_string(data.dims()[i]) + "]");
    if (!(eb_abs > 0)) throw DataError("entropy needs a positive absolute error bound");
    EntropyMap m;
    m.block_dims = block_dims;
    m.eb_abs = eb_abs;
    const auto& dims = data.dims();
    for (std::size_t i = 0; i < dims.size(); ++i) m.grid.push_back((dims[i] + block_dims[i] - 1) / block_dims[i]);
    const auto strides = row_major_strides(dims);
    const auto vals = data.values();
    std::vector<double> tile;
    for_each_index(std::vector<std::size_t>(dims.size(), 0), m.grid, [&](const std::vector<std::size_t>& t) {
        std::vector<std::size_t> lo(dims.size()), ext(dims.size());
        for (std::size_t a = 0; a < dims.size(); ++a) {
            lo[a] = t[a] * block_dims[a];
            ext[a] = std::min(block_dims[a], dims[a] - lo[a]);
        }
        tile.clear();
        for_each_index(lo, ext, [&](const std::vector<std::size_t>& idx) {
            const double v = vals[flat_index(idx, strides)];
            if (std::isfinite(v)) tile.push_back(v);
        });
        m.values.push_back(tile.empty() ? 0.0 : entropy(tile, eb_abs));
    });
    return m;
}

/// Finite-difference field along one axis with its magnitude summary.
struct SmoothnessResult {
    std::size_t axis = 0;
    int order = 1;
    std::vector<std::size_t> dims;
    std::vector<double> field;
    double mean_abs = 0;
    double max_abs = 0;
};

/// order 1: f(i+1) - f(i); order 2: f(i-1) - 2 f(i) + f(i+1). The output shrinks by `order` along `axis`.
inline SmoothnessResult smoothness(const Dataset& data, std::size_t axis, int order) {
    if (order != 1 && order != 2) throw DataError("derivative order must be 1 or 2");
    if (axis >= data.rank())
        throw DataError("axis " + std::to_string(axis) + " out of range for rank " + std::to_string(data.rank()));
    data.require_finite("smoothness");
    const auto& dims = data.dims();
    if (dims[axis] < static_cast<std::size_t>(order) + 1)
        throw DataError("extent " + std::to_string(dims[axis]) + " along axis " + std::to_string(axis) +
                        " is too small for order " + std::to_string(order));
    SmoothnessResult r;
    r.axis = axis;
    r.order = order;
    r.dims = dims;
    r.dims[axis] -= static_cast<std::size_t>(order);
    const auto strides = row_major_strides(dims);
    const std::size_t step = strides[axis];
    const auto f = data.values();
    r.field.reserve(product(r.dims));
    double sum = 0;
    for_each_index(std::vector<std::size_t>(dims.size(), 0), r.dims, [&](const std::vector<std::size_t>& idx) {
        const std::size_t o = flat_index(idx, strides);
        const double d = order == 1 ? f[o + step] - f[o] : f[o] - 2 * f[o + step] + f[o + 2 * step];
        r.field.push_back(d);
        sum += std::abs(d);
        r.max_abs = std::max(r.max_abs, std::abs(d));
    });
    r.mean_abs = sum / static_cast<double>(r.field.size());
    return r;
}

struct AutocorrSeries {
    std::vector<double> coefficients;  ///< index = lag, 0..max_lag

    [[nodiscard]] std::size_t max_lag() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }
    friend bool operator==(const AutocorrSeries&, const AutocorrSeries&) = default;
};

/// AC(tau) = [sum_{i<N-tau} (x_i - mu)(x_{i+tau} - mu) / N] / sigma^2 with full-series moments.
inline AutocorrSeries autocorrelation(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    if (n == 0) throw DataError("autocorrelation of an empty series");
    if (max_lag >= n)
        throw DataError("max_lag " + std::to_string(max_lag) + " must be below the series length " + std::to_string(n));
    double mu = 0;
    for (double v : x) mu += v;
    mu /= static_cast<double>(n);
    std::vector<double> c(x.size());
    for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - mu;
    auto lagged = [&](std::size_t tau) {
        double s = 0;
        for (std::size_t i = 0; i + tau < n; ++i) s += c[i] * c[i + tau];
        return s / static_cast<double>(n);
    };
    const double var = lagged(0);
    if (!(var > 0)) throw UndefinedMetric("undefined autocorrelation: series has zero variance");
    AutocorrSeries ac;
    ac.coefficients.resize(max_lag + 1);
    ac.coefficients[0] = 1.0;
    for (std::size_t tau = 1; tau <= max_lag; ++tau) ac.coefficients[tau] = lagged(tau) / var;
    return ac;
}

inline AutocorrSeries autocorrelation(const Dataset& data, std::size_t max_lag) {
    data.require_finite("autocorrelation");
    return autocorrelation(data.values(), max_lag);
}

struct PcaSummary {
    std::vector<double> singular_values;
    std::vector<double> explained_variance_ratio;
    /// Set when the centered matrix is all zeros; ratios are then {1} by convention.
    bool degenerate = false;

    friend bool operator==(const PcaSummary&, const PcaSummary&) = default;
};

/// Rows = first (slowest) dimension, columns = the rest; columns are mean-centered before the SVD.
inline PcaSummary pca_summary(const Dataset& data) {
    if (data.rank() < 2) throw DataError("PCA needs a dataset of rank 2 or more");
    data.require_finite("PCA");
    const auto rows = static_cast<Eigen::Index>(data.dims()[0]);
    const auto cols = static_cast<Eigen::Index>(data.size() / data.dims()[0]);
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMatrix> raw(data.values().data(), rows, cols);
    // Differences from the first row are centered instead of the raw values so identical rows cancel exactly.
    RowMatrix y = raw.rowwise() - raw.row(0);
    const Eigen::RowVectorXd mean = y.colwise().mean();
    y.rowwise() -= mean;

    PcaSummary s;
    if (y.cwiseAbs().maxCoeff() == 0) {
        s.singular_values.assign(static_cast<std::size_t>(std::min(rows, cols)), 0.0);
        s.explained_variance_ratio = {1.0};
        s.degenerate = true;
        return s;
    }
    const Eigen::MatrixXd gram = rows <= cols ? Eigen::MatrixXd(y * y.transpose()) : Eigen::MatrixXd(y.transpose() * y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("PCA eigen-decomposition did not converge");
    std::vector<double> eig(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    for (auto& e : eig) e = std::max(e, 0.0);
    std::sort(eig.begin(), eig.end(), std::greater<>());
    double total = 0;
    for (double e : eig) total += e;
    for (double e : eig) {
        s.singular_values.push_back(std::sqrt(e));
        s.explained_variance_ratio.push_back(e / total);
    }
    return s;
}

/// Power spectrum of the row-major flattened dataset.
inline std::vector<double> power_spectrum(const Dataset& data) {
    data.require_finite("power spectrum");
    return psd(data.values());
}

}  // namespace zqual

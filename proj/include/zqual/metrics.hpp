#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "zqual/error.hpp"

namespace zqual {

/// Global distortion between an original and a reconstructed series.
/// Range-normalized fields are empty when the original has zero value range.
struct DistortionStats {
    double value_range = 0;
    double max_abs_err = 0;  ///< max |x - x~|
    double mean_err = 0;     ///< signed mean of x - x~
    std::optional<double> max_rel_err;
    double rmse = 0;
    std::optional<double> nrmse;
    std::optional<double> psnr;  ///< +infinity when the reconstruction is exact

    friend bool operator==(const DistortionStats&, const DistortionStats&) = default;
};

inline double value_range(std::span<const double> values) {
    if (values.empty()) throw DataError("value range of an empty series");
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo;
}

inline double psnr_from_nrmse(double nrmse) {
    if (nrmse == 0) return std::numeric_limits<double>::infinity();
    return -20.0 * std::log10(nrmse);
}

/// RMSE, NRMSE = RMSE / range and PSNR = -20 log10(NRMSE). `range` defaults to the original's value range.
inline DistortionStats distortion_stats(std::span<const double> orig, std::span<const double> recon,
                                        std::optional<double> range = std::nullopt) {
    if (orig.size() != recon.size())
        throw DataError("shape mismatch: " + std::to_string(orig.size()) + " vs " + std::to_string(recon.size()));
    if (orig.empty()) throw DataError("distortion of empty series");
    DistortionStats s;
    s.value_range = range ? *range : value_range(orig);
    double sum_sq = 0, sum = 0, max_abs = 0;
    for (std::size_t i = 0; i < orig.size(); ++i) {
        const double e = orig[i] - recon[i];
        sum += e;
        sum_sq += e * e;
        max_abs = std::max(max_abs, std::abs(e));
    }
    const auto n = static_cast<double>(orig.size());
    s.max_abs_err = max_abs;
    s.mean_err = sum / n;
    s.rmse = std::sqrt(sum_sq / n);
    if (s.value_range > 0) {
        s.max_rel_err = max_abs / s.value_range;
        s.nrmse = s.rmse / s.value_range;
        s.psnr = psnr_from_nrmse(*s.nrmse);
    }
    return s;
}

}  // namespace zqual

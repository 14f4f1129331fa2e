#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zqual/checker.hpp"
#include "zqual/dataset.hpp"
#include "zqual/properties.hpp"
#include "zqual/spectral.hpp"

namespace zqual {

/// One (compressor, bound) execution: sizes and wall-clock times of both directions.
struct CompressionRun {
    std::string compressor_id;
    ErrorBoundSpec bound;
    double eb_abs = 0;  ///< bound resolved against the original's value range
    std::size_t comp_bytes = 0;
    double comp_seconds = 0;
    double decomp_seconds = 0;
    std::filesystem::path recon_path;
    SizeMetrics sizes;
    double throughput_comp = 0;  ///< original bytes per second
    double throughput_decomp = 0;
    /// Timed while other runs of the same compressor were in flight.
    bool contended = false;
};

struct ReportOptions {
    std::size_t bins = 1000;
    std::size_t max_lag = 100;
    double spectrum_threshold = 1e-12;
    bool spectrum = true;
    bool wavelet = true;
    bool derived = true;
};

/// Every original-vs-reconstructed metric for one run.
struct CompressionReport {
    CompressionRun run;
    DistortionStats distortion;
    BoundCheck bound_check;
    std::optional<double> pearson;
    Histogram error_pdf;
    std::optional<AutocorrSeries> error_autocorr;
    std::optional<SpectrumDiff> spectrum;
    std::optional<DistortionStats> wavelet;
    std::vector<DerivedFieldComparison> derived;
};

inline CompressionReport build_report(const Dataset& orig, const Dataset& recon, CompressionRun run,
                                      const ReportOptions& opt = {}) {
    CompressionReport r;
    r.run = std::move(run);
    const auto errors = pointwise_errors(orig, recon);
    r.distortion = distortion_stats(orig, recon);
    if (errors.rel_errors || r.run.bound.kind == BoundKind::absolute) r.bound_check = check_bound(errors, r.run.bound);
    else r.bound_check = check_bound(errors, ErrorBoundSpec::absolute(r.run.eb_abs));
    try {
        r.pearson = pearson(orig, recon);
    } catch (const UndefinedMetric&) {
    }
    r.error_pdf = error_distribution(errors, opt.bins);
    if (orig.size() > 1) {
        try {
            r.error_autocorr = error_autocorrelation(errors, std::min(opt.max_lag, orig.size() - 1));
        } catch (const UndefinedMetric&) {
        }
    }
    if (opt.spectrum) r.spectrum = compare_spectra(orig, recon, opt.spectrum_threshold);
    if (opt.wavelet && orig.size() % 2 == 0) r.wavelet = compare_wavelets(orig, recon);
    if (opt.derived) {
        if (orig.rank() == 3) {
            const auto& d = orig.dims();
            if (d[0] >= 2 && d[1] >= 2 && d[2] >= 2) r.derived.push_back(compare_derived(orig, recon, DerivedKind::divergence));
            if (d[0] >= 3 && d[1] >= 3 && d[2] >= 3) r.derived.push_back(compare_derived(orig, recon, DerivedKind::laplacian));
        }
        for (std::size_t axis = 0; axis < orig.rank(); ++axis) {
            if (orig.dims()[axis] >= 2) r.derived.push_back(compare_derived(orig, recon, DerivedKind::partial1, axis));
            if (orig.dims()[axis] >= 3) r.derived.push_back(compare_derived(orig, recon, DerivedKind::partial2, axis));
        }
    }
    return r;
}

}  // namespace zqual

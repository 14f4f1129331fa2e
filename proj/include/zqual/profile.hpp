#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zqual/dataset.hpp"
#include "zqual/properties.hpp"

namespace zqual {

struct ProfileOptions {
    std::size_t bins = 1000;
    std::size_t max_lag = 100;
    std::vector<double> entropy_bounds = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::optional<std::vector<std::size_t>> block_dims;
    bool spectrum = true;
};

struct EntropyPoint {
    double eb_abs = 0;
    double bits = 0;
};

struct SmoothnessSummary {
    std::size_t axis = 0;
    int order = 1;
    double mean_abs = 0;
    double max_abs = 0;
};

/// Every property of one original dataset. Optional parts are absent when undefined for the input.
struct PropertyReport {
    std::string dataset_id;
    std::vector<std::size_t> dims;
    BasicStats stats;
    Histogram distribution;
    std::vector<EntropyPoint> entropy;
    std::vector<EntropyMap> entropy_maps;
    std::optional<AutocorrSeries> autocorr;
    std::string autocorr_note;
    std::vector<double> power_spectrum;
    std::optional<PcaSummary> pca;
    std::vector<SmoothnessSummary> smoothness;
};

inline PropertyReport profile_dataset(const Dataset& data, const ProfileOptions& opt = {}) {
    PropertyReport r;
    r.dataset_id = data.descriptor().id;
    r.dims = data.dims();
    r.stats = basic_stats(data);
    r.distribution = distribution(data, opt.bins);
    for (double eb : opt.entropy_bounds) r.entropy.push_back({eb, entropy(data, eb)});
    if (opt.block_dims) {
        std::vector<std::size_t> block = *opt.block_dims;
        // Blocks larger than the dataset are clipped to it.
        for (std::size_t i = 0; i < block.size() && i < data.rank(); ++i) block[i] = std::min(block[i], data.dims()[i]);
        for (double eb : opt.entropy_bounds) r.entropy_maps.push_back(block_entropy(data, eb, block));
    }
    if (data.has_nonfinite()) {
        r.autocorr_note = "skipped: dataset has non-finite values";
        return r;
    }
    try {
        r.autocorr = autocorrelation(data, std::min(opt.max_lag, data.size() - 1));
    } catch (const Error& e) {
        r.autocorr_note = e.what();
    }
    if (opt.spectrum) r.power_spectrum = power_spectrum(data);
    if (data.rank() >= 2) r.pca = pca_summary(data);
    for (std::size_t axis = 0; axis < data.rank(); ++axis)
        for (int order : {1, 2})
            if (data.dims()[axis] >= static_cast<std::size_t>(order) + 1) {
                auto s = smoothness(data, axis, order);
                r.smoothness.push_back({axis, order, s.mean_abs, s.max_abs});
            }
    return r;
}

}  // namespace zqual

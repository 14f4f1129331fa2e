#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "zqual/compression.hpp"
#include "zqual/compressor_spec.hpp"
#include "zqual/dataset.hpp"
#include "zqual/error.hpp"
#include "zqual/io.hpp"
#include "zqual/mock_codecs.hpp"
#include "zqual/process.hpp"
#include "zqual/serialize.hpp"

namespace zqual {

/// Result-store key: compressor name plus one error control.
struct StoreKey {
    std::string compressor_id;
    ErrorBoundSpec bound;

    [[nodiscard]] std::string str() const { return compressor_id + "@" + bound.str(); }
    [[nodiscard]] std::string file_stem() const { return file_safe(compressor_id + "__" + short_tag(bound.kind) + "_" + format_shortest(bound.magnitude)); }

    friend bool operator==(const StoreKey&, const StoreKey&) = default;
    friend std::partial_ordering operator<=>(const StoreKey& a, const StoreKey& b) {
        if (auto c = a.compressor_id <=> b.compressor_id; c != 0) return c;
        return a.bound <=> b.bound;
    }
};

/// Keyed map (compressor, bound) -> CompressionReport. Writes are exclusive, reads shared.
class ResultStore {
public:
    ResultStore() = default;
    ResultStore(ResultStore&& other) noexcept {
        std::unique_lock lock(other.mu_);
        entries_ = std::move(other.entries_);
    }
    ResultStore& operator=(ResultStore&& other) noexcept {
        if (this != &other) {
            std::scoped_lock lock(mu_, other.mu_);
            entries_ = std::move(other.entries_);
        }
        return *this;
    }

    void put(const StoreKey& key, CompressionReport report, bool overwrite = false) {
        std::unique_lock lock(mu_);
        if (!overwrite && entries_.count(key)) throw Error("duplicate key " + key.str());
        entries_.insert_or_assign(key, std::move(report));
    }

    [[nodiscard]] CompressionReport get(const StoreKey& key) const {
        std::shared_lock lock(mu_);
        auto it = entries_.find(key);
        if (it == entries_.end()) throw NotFound("no result for " + key.str());
        return it->second;
    }

    [[nodiscard]] std::optional<CompressionReport> find(const StoreKey& key) const {
        std::shared_lock lock(mu_);
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] bool contains(const StoreKey& key) const {
        std::shared_lock lock(mu_);
        return entries_.count(key) != 0;
    }

    [[nodiscard]] std::size_t size() const {
        std::shared_lock lock(mu_);
        return entries_.size();
    }

    [[nodiscard]] std::vector<StoreKey> keys() const {
        std::shared_lock lock(mu_);
        std::vector<StoreKey> k;
        for (const auto& [key, _] : entries_) k.push_back(key);
        return k;
    }

    /// One JSON file per key plus index.json mapping keys to files.
    void save(const std::filesystem::path& dir) const {
        std::shared_lock lock(mu_);
        json index = json::array();
        std::set<std::string> used;
        for (const auto& [key, report] : entries_) {
            std::string stem = key.file_stem();
            for (int n = 1; !used.insert(stem).second; ++n) stem = key.file_stem() + "-" + std::to_string(n);
            const std::string file = stem + ".json";
            write_text_atomic(dir / file, to_json(report).dump(1));
            index.push_back({{"compressor_id", key.compressor_id}, {"bound", to_json(key.bound)}, {"file", file}});
        }
        write_text_atomic(dir / "index.json", index.dump(1));
    }

    static ResultStore load(const std::filesystem::path& dir) {
        ResultStore s;
        const auto index = json::parse(read_text_file(dir / "index.json"));
        for (const auto& e : index) {
            StoreKey key{e.at("compressor_id").get<std::string>(), bound_from_json(e.at("bound"))};
            s.put(key, report_from_json(json::parse(read_text_file(dir / e.at("file").get<std::string>()))));
        }
        return s;
    }

private:
    mutable std::shared_mutex mu_;
    std::map<StoreKey, CompressionReport> entries_;
};

/// Scratch directory: ZQUAL_WORKDIR when set, else a per-process temp directory.
inline std::filesystem::path default_workdir() {
    if (const char* env = std::getenv("ZQUAL_WORKDIR"); env && *env) return env;
    return std::filesystem::temp_directory_path() / ("zqual-work-" + std::to_string(::getpid()));
}

struct RunOptions {
    /// Skip the per-(dataset, compressor) exclusive section; the run is flagged as contended.
    bool contended = false;
};

namespace detail {

inline std::mutex& run_lock_for(const std::string& key) {
    static std::mutex registry_mu;
    static std::map<std::string, std::mutex> locks;
    std::lock_guard g(registry_mu);
    return locks[key];
}

inline std::map<std::string, std::string> placeholder_values(const DatasetDescriptor& d, double eb_abs,
                                                             std::optional<double> eb_rel) {
    std::map<std::string, std::string> v;
    v["eb_abs"] = format_shortest(eb_abs);
    if (eb_rel) v["eb_rel"] = format_shortest(*eb_rel);
    for (std::size_t i = 0; i < d.dims.size(); ++i) v["dim" + std::to_string(i + 1)] = std::to_string(d.dims[i]);
    v["precision"] = to_string(d.precision);
    return v;
}

inline double timed_step(const CompressorSpec& spec, const std::string& tmpl, mock::Direction dir,
                         const std::filesystem::path& in, const std::filesystem::path& out,
                         std::map<std::string, std::string> values, const mock::CodecContext& ctx,
                         const std::filesystem::path& log_base) {
    std::error_code ec;
    std::filesystem::remove(out, ec);
    double seconds = 0;
    if (spec.is_builtin()) {
        const auto codec = std::string_view(tmpl).substr(kBuiltinPrefix.size());
        const auto start = std::chrono::steady_clock::now();
        mock::run_codec(codec, dir, in, out, ctx);
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } else {
        values["input"] = in.string();
        values["output"] = out.string();
        std::vector<std::string> argv;
        for (const auto& a : split_command(tmpl)) argv.push_back(substitute(a, values));
        auto so = log_base;
        so += ".stdout.log";
        auto se = log_base;
        se += ".stderr.log";
        seconds = run_process(argv, so, se).seconds;
    }
    if (!std::filesystem::is_regular_file(out, ec))
        throw ProcessError("compressor '" + spec.id + "' produced no output file '" + out.filename().string() + "'");
    return std::max(seconds, 1e-9);
}

}  // namespace detail

/// Compresses then decompresses the original under `bound`, each step timed separately.
/// The original is read from its descriptor path when that file matches, otherwise staged into workdir.
inline CompressionRun run_compression(const CompressorSpec& spec, const Dataset& orig, const ErrorBoundSpec& bound,
                                      const std::filesystem::path& workdir, const RunOptions& opt = {}) {
    spec.validate();
    if (!spec.supported_bound_kinds.count(bound.kind))
        throw Error("compressor '" + spec.id + "' does not support " + to_string(bound.kind) + " bounds");
    if (spec.is_builtin() && !mock::is_known_codec(std::string_view(spec.compress_template).substr(kBuiltinPrefix.size())))
        throw Error("unknown builtin codec in '" + spec.compress_template + "'");
    orig.require_finite("compression runs");

    const auto& d = orig.descriptor();
    const double range = value_range(orig.values());
    const double eb_abs = bound.to_absolute(range);
    std::optional<double> eb_rel;
    if (bound.kind == BoundKind::value_range_relative) eb_rel = bound.magnitude;
    else if (range > 0) eb_rel = bound.magnitude / range;

    std::filesystem::create_directories(workdir);
    const StoreKey key{spec.id, bound};
    const std::string stem = file_safe(d.id) + "__" + key.file_stem();
    std::filesystem::path input = d.path;
    std::error_code ec;
    if (input.empty() || !std::filesystem::is_regular_file(input, ec) ||
        std::filesystem::file_size(input, ec) != d.byte_size()) {
        // One staged copy per key so concurrent runs never share a half-written input.
        input = workdir / (stem + ".orig");
        write_dataset(input, orig);
    }

    mock::CodecContext ctx{d, bound, eb_abs, range};
    const auto values = detail::placeholder_values(d, eb_abs, eb_rel);
    const auto cmp = workdir / (stem + ".cmp");
    const auto out = workdir / (stem + ".out");

    std::unique_lock<std::mutex> lock;
    if (!opt.contended) lock = std::unique_lock(detail::run_lock_for(d.id + "\n" + spec.id));

    CompressionRun run;
    run.compressor_id = spec.id;
    run.bound = bound;
    run.eb_abs = eb_abs;
    run.contended = opt.contended;
    run.comp_seconds = detail::timed_step(spec, spec.compress_template, mock::Direction::compress, input, cmp, values,
                                          ctx, workdir / (stem + ".compress"));
    run.comp_bytes = std::filesystem::file_size(cmp);
    run.decomp_seconds = detail::timed_step(spec, spec.decompress_template, mock::Direction::decompress, cmp, out,
                                            values, ctx, workdir / (stem + ".decompress"));
    const auto recon_bytes = std::filesystem::file_size(out);
    if (recon_bytes != d.byte_size())
        throw DataError("reconstruction of '" + spec.id + "' has " + std::to_string(recon_bytes) + " bytes, expected " +
                        std::to_string(d.byte_size()));
    run.recon_path = out;
    run.sizes = size_metrics(d.byte_size(), run.comp_bytes, d.element_count(), d.precision);
    run.throughput_comp = static_cast<double>(d.byte_size()) / run.comp_seconds;
    run.throughput_decomp = static_cast<double>(d.byte_size()) / run.decomp_seconds;
    return run;
}

inline CompressionRun run_compression(const CompressorSpec& spec, const DatasetDescriptor& dataset,
                                      const ErrorBoundSpec& bound, const std::filesystem::path& workdir,
                                      const RunOptions& opt = {}) {
    return run_compression(spec, load_dataset(dataset), bound, workdir, opt);
}

inline Dataset load_reconstruction(const CompressionRun& run, const Dataset& orig) {
    auto d = orig.descriptor();
    d.path = run.recon_path;
    return load_dataset(d);
}

/// run_compression followed by the full metric battery on the reconstruction.
inline CompressionReport run_and_report(const CompressorSpec& spec, const Dataset& orig, const ErrorBoundSpec& bound,
                                        const std::filesystem::path& workdir, const ReportOptions& ropt = {},
                                        const RunOptions& opt = {}) {
    auto run = run_compression(spec, orig, bound, workdir, opt);
    const auto recon = load_reconstruction(run, orig);
    return build_report(orig, recon, std::move(run), ropt);
}

struct RatePoint {
    double bit_rate = 0;
    double psnr = 0;  ///< +inf for a lossless point
    ErrorBoundSpec bound;

    friend bool operator==(const RatePoint&, const RatePoint&) = default;
};

struct SweepFailure {
    ErrorBoundSpec bound;
    std::string message;
};

/// PSNR against bit rate for one compressor, ascending in bit rate.
struct RateDistortionCurve {
    std::string compressor_id;
    std::string dataset_id;
    std::vector<RatePoint> points;
    std::vector<SweepFailure> failures;

    [[nodiscard]] bool partial() const { return !failures.empty(); }
};

struct SweepOptions {
    ReportOptions report;
    bool parallel = false;
    bool overwrite = false;
};

inline void check_unique_bounds(const std::string& compressor_id, const std::vector<ErrorBoundSpec>& bounds) {
    std::set<ErrorBoundSpec> seen;
    for (const auto& b : bounds)
        if (!seen.insert(b).second) throw Error("duplicate key " + StoreKey{compressor_id, b}.str());
}

/// One compression per bound; every report goes into `store`. Failing points are recorded, not fatal.
inline RateDistortionCurve sweep(const CompressorSpec& spec, const Dataset& orig, const std::vector<ErrorBoundSpec>& bounds,
                                 const std::filesystem::path& workdir, ResultStore& store, const SweepOptions& opt = {}) {
    if (bounds.empty()) throw Error("sweep needs at least one bound");
    check_unique_bounds(spec.id, bounds);
    if (!opt.overwrite)
        for (const auto& b : bounds)
            if (store.contains({spec.id, b})) throw Error("duplicate key " + StoreKey{spec.id, b}.str());

    RateDistortionCurve curve;
    curve.compressor_id = spec.id;
    curve.dataset_id = orig.descriptor().id;

    std::vector<std::optional<CompressionReport>> reports(bounds.size());
    std::vector<std::string> errors(bounds.size());
    auto one = [&](std::size_t i, bool contended) {
        try {
            reports[i] = run_and_report(spec, orig, bounds[i], workdir, opt.report, RunOptions{contended});
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };
    if (opt.parallel && bounds.size() > 1) {
        std::vector<std::future<void>> jobs;
        for (std::size_t i = 0; i < bounds.size(); ++i) jobs.push_back(std::async(std::launch::async, one, i, true));
        for (auto& j : jobs) j.get();
    } else {
        for (std::size_t i = 0; i < bounds.size(); ++i) one(i, false);
    }

    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (!reports[i]) {
            curve.failures.push_back({bounds[i], errors[i]});
            continue;
        }
        const auto& r = *reports[i];
        store.put({spec.id, bounds[i]}, r, opt.overwrite);
        if (!r.distortion.psnr) {
            curve.failures.push_back({bounds[i], "psnr undefined: dataset has zero value range"});
            continue;
        }
        curve.points.push_back({r.run.sizes.br, *r.distortion.psnr, bounds[i]});
    }
    std::stable_sort(curve.points.begin(), curve.points.end(),
                     [](const RatePoint& a, const RatePoint& b) { return a.bit_rate < b.bit_rate; });
    return curve;
}

/// Rebuilds a curve from reports already in the store (for callers that reuse earlier runs).
inline RateDistortionCurve curve_from_store(const std::string& compressor_id, const std::string& dataset_id,
                                            const std::vector<ErrorBoundSpec>& bounds, const ResultStore& store) {
    RateDistortionCurve curve{compressor_id, dataset_id, {}, {}};
    for (const auto& b : bounds) {
        auto r = store.find({compressor_id, b});
        if (!r) {
            curve.failures.push_back({b, "no result for " + StoreKey{compressor_id, b}.str()});
        } else if (!r->distortion.psnr) {
            curve.failures.push_back({b, "psnr undefined: dataset has zero value range"});
        } else {
            curve.points.push_back({r->run.sizes.br, *r->distortion.psnr, b});
        }
    }
    std::stable_sort(curve.points.begin(), curve.points.end(),
                     [](const RatePoint& a, const RatePoint& b) { return a.bit_rate < b.bit_rate; });
    return curve;
}

}  // namespace zqual

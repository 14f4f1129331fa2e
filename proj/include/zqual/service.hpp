#pragma once

// Interactive-mode backend: analysis queries in, JSON payloads out, with a result cache.
//
//   GET  /api/health
//   GET  /api/catalog
//   POST /api/analyze     AnalysisQuery -> {"cached":bool,"payload":{...}}  or 202 {"job_id":"..."}
//   GET  /api/jobs/{id}   {"status":"running"} | {"status":"done","cached":bool,"payload":{...}} | {"status":"failed","error":"..."}
//   GET  /                static web client (when a web root is configured)

#include <atomic>
#include <chrono>
#include <deque>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "zqual/checker.hpp"
#include "zqual/config.hpp"
#include "zqual/driver.hpp"
#include "zqual/profile.hpp"
#include "zqual/serialize.hpp"

namespace zqual {

enum class AnalysisKind {
    stats,
    distribution,
    entropy_map,
    autocorrelation,
    psd,
    pca,
    error_pdf,
    distortion,
    rate_distortion,
    error_autocorrelation,
    spectrum_diff,
    derived_comparison,
    speed,
};

inline constexpr std::array<std::pair<AnalysisKind, std::string_view>, 13> kAnalysisNames = {{
    {AnalysisKind::stats, "stats"},
    {AnalysisKind::distribution, "distribution"},
    {AnalysisKind::entropy_map, "entropy_map"},
    {AnalysisKind::autocorrelation, "autocorrelation"},
    {AnalysisKind::psd, "psd"},
    {AnalysisKind::pca, "pca"},
    {AnalysisKind::error_pdf, "error_pdf"},
    {AnalysisKind::distortion, "distortion"},
    {AnalysisKind::rate_distortion, "rate_distortion"},
    {AnalysisKind::error_autocorrelation, "error_autocorrelation"},
    {AnalysisKind::spectrum_diff, "spectrum_diff"},
    {AnalysisKind::derived_comparison, "derived_comparison"},
    {AnalysisKind::speed, "speed"},
}};

inline std::string to_string(AnalysisKind k) {
    for (const auto& [kind, name] : kAnalysisNames)
        if (kind == k) return std::string(name);
    return "?";
}

inline std::optional<AnalysisKind> parse_analysis_kind(std::string_view s) {
    for (const auto& [kind, name] : kAnalysisNames)
        if (name == s) return kind;
    return std::nullopt;
}

inline bool needs_compression(AnalysisKind k) {
    switch (k) {
        case AnalysisKind::stats:
        case AnalysisKind::distribution:
        case AnalysisKind::entropy_map:
        case AnalysisKind::autocorrelation:
        case AnalysisKind::psd:
        case AnalysisKind::pca: return false;
        default: return true;
    }
}

/// A validated query. `params` holds only the keys meaningful for `analysis`, with defaults filled in.
struct AnalysisQuery {
    std::string dataset_id;
    std::vector<std::string> compressor_ids;
    std::vector<ErrorBoundSpec> bound_sweep;
    AnalysisKind analysis = AnalysisKind::stats;
    json params = json::object();
    /// Run sweeps inline rather than as a polled job. Not part of the cache key.
    bool sync = false;

    /// Canonical serialization: sorted keys, no whitespace, bound order preserved.
    [[nodiscard]] std::string canonical_key() const {
        json j;
        j["dataset_id"] = dataset_id;
        j["analysis"] = to_string(analysis);
        j["params"] = params;
        if (needs_compression(analysis)) {
            j["compressor_ids"] = compressor_ids;
            json b = json::array();
            for (const auto& x : bound_sweep) b.push_back(to_json(x));
            j["bound_sweep"] = b;
        }
        return j.dump();
    }
};

namespace detail {

inline std::size_t param_positive(const json& params, const char* name, std::size_t fallback) {
    if (!params.contains(name)) return fallback;
    const auto& v = params.at(name);
    if (!v.is_number_integer() || v.get<long long>() <= 0)
        throw BadRequest(std::string("parameter '") + name + "' must be a positive integer");
    return v.get<std::size_t>();
}

}  // namespace detail

/// Validates a raw JSON query against the configuration and fills analysis defaults.
inline AnalysisQuery parse_query(const json& j, const AnalysisConfig& cfg) {
    if (!j.is_object()) throw BadRequest("query must be a JSON object");
    static const std::set<std::string> known = {"dataset_id", "compressor_ids", "bound_sweep", "analysis", "params", "sync"};
    for (const auto& [k, _] : j.items())
        if (!known.count(k)) throw BadRequest("unknown query field '" + k + "'");
    AnalysisQuery q;
    if (!j.contains("dataset_id") || !j.at("dataset_id").is_string()) throw BadRequest("dataset_id is required");
    q.dataset_id = j.at("dataset_id").get<std::string>();
    const auto& ds = cfg.dataset(q.dataset_id);
    if (!j.contains("analysis") || !j.at("analysis").is_string()) throw BadRequest("analysis is required");
    auto kind = parse_analysis_kind(j.at("analysis").get<std::string>());
    if (!kind) throw BadRequest("unknown analysis '" + j.at("analysis").get<std::string>() + "'");
    q.analysis = *kind;
    if (j.contains("sync")) {
        if (!j.at("sync").is_boolean()) throw BadRequest("sync must be a boolean");
        q.sync = j.at("sync").get<bool>();
    }
    if (j.contains("compressor_ids")) {
        if (!j.at("compressor_ids").is_array()) throw BadRequest("compressor_ids must be an array");
        for (const auto& c : j.at("compressor_ids")) {
            if (!c.is_string()) throw BadRequest("compressor ids must be strings");
            q.compressor_ids.push_back(c.get<std::string>());
            (void)cfg.compressor(q.compressor_ids.back());
        }
    }
    if (j.contains("bound_sweep")) {
        if (!j.at("bound_sweep").is_array()) throw BadRequest("bound_sweep must be an array");
        for (const auto& b : j.at("bound_sweep")) q.bound_sweep.push_back(bound_from_json(b));
    } else {
        q.bound_sweep = cfg.bound_sweep;
    }
    json in = j.value("params", json::object());
    if (!in.is_object()) throw BadRequest("params must be an object");

    std::set<std::string> allowed;
    json& p = q.params;
    const std::size_t n = ds.element_count();
    switch (q.analysis) {
        case AnalysisKind::distribution:
        case AnalysisKind::error_pdf: {
            allowed = {"bins"};
            const auto bins = detail::param_positive(in, "bins", cfg.histogram_bins);
            if (bins < 2) throw BadRequest("bins must be at least 2");
            p["bins"] = bins;
            break;
        }
        case AnalysisKind::autocorrelation:
        case AnalysisKind::error_autocorrelation: {
            allowed = {"max_lag"};
            const auto lag = detail::param_positive(in, "max_lag", std::min(cfg.max_lag, n - 1));
            if (lag >= n) throw BadRequest("max_lag must be below the dataset size");
            p["max_lag"] = lag;
            break;
        }
        case AnalysisKind::entropy_map: {
            allowed = {"eb_abs", "block"};
            double eb = cfg.entropy_bounds.empty() ? 1e-3 : cfg.entropy_bounds.front();
            if (in.contains("eb_abs")) {
                if (!in.at("eb_abs").is_number() || !(in.at("eb_abs").get<double>() > 0))
                    throw BadRequest("eb_abs must be a positive number");
                eb = in.at("eb_abs").get<double>();
            }
            std::vector<std::size_t> block = cfg.block_dims.value_or(ds.dims);
            if (in.contains("block")) {
                block.clear();
                if (!in.at("block").is_array()) throw BadRequest("block must be an array of positive integers");
                for (const auto& b : in.at("block")) {
                    if (!b.is_number_integer() || b.get<long long>() <= 0)
                        throw BadRequest("block must be an array of positive integers");
                    block.push_back(b.get<std::size_t>());
                }
            }
            if (block.size() != ds.dims.size()) throw BadRequest("block rank does not match the dataset");
            for (std::size_t i = 0; i < block.size(); ++i)
                if (block[i] > ds.dims[i]) throw BadRequest("block exceeds the dataset extent");
            p["eb_abs"] = eb;
            p["block"] = block;
            break;
        }
        case AnalysisKind::spectrum_diff: {
            allowed = {"threshold"};
            double t = cfg.spectrum_threshold;
            if (in.contains("threshold")) {
                if (!in.at("threshold").is_number() || in.at("threshold").get<double>() < 0)
                    throw BadRequest("threshold must be a non-negative number");
                t = in.at("threshold").get<double>();
            }
            p["threshold"] = t;
            break;
        }
        case AnalysisKind::derived_comparison: {
            allowed = {"derivative", "axis"};
            std::string kindname = ds.dims.size() == 3 ? "laplacian" : "partial1";
            if (in.contains("derivative")) {
                if (!in.at("derivative").is_string()) throw BadRequest("derivative must be a string");
                kindname = in.at("derivative").get<std::string>();
            }
            auto dk = parse_derived_kind(kindname);
            if (!dk) throw BadRequest("unknown derivative '" + kindname + "'");
            if ((*dk == DerivedKind::divergence || *dk == DerivedKind::laplacian) && ds.dims.size() != 3)
                throw BadRequest(kindname + " needs a rank-3 dataset");
            const auto axis = in.contains("axis") ? detail::param_positive(json{{"a", in.at("axis").is_number_integer() ? in.at("axis").get<long long>() + 1 : 0}}, "a", 1) - 1 : 0;
            if (axis >= ds.dims.size()) throw BadRequest("axis out of range");
            p["derivative"] = kindname;
            p["axis"] = axis;
            break;
        }
        default: break;
    }
    for (const auto& [k, _] : in.items())
        if (!allowed.count(k)) throw BadRequest("parameter '" + k + "' does not apply to " + to_string(q.analysis));

    if (needs_compression(q.analysis)) {
        if (q.compressor_ids.empty()) throw BadRequest(to_string(q.analysis) + " needs at least one compressor");
        if (q.bound_sweep.empty()) throw BadRequest(to_string(q.analysis) + " needs at least one bound");
        for (const auto& c : q.compressor_ids) {
            const auto& spec = cfg.compressor(c);
            for (const auto& b : q.bound_sweep)
                if (!spec.supported_bound_kinds.count(b.kind))
                    throw BadRequest("compressor '" + c + "' does not support " + to_string(b.kind) + " bounds");
        }
        try {
            for (const auto& c : q.compressor_ids) check_unique_bounds(c, q.bound_sweep);
        } catch (const Error& e) {
            throw BadRequest(e.what());
        }
    }
    return q;
}

struct CacheEntry {
    std::string key;
    std::string payload;
    std::chrono::system_clock::time_point created_at;
    std::size_t hit_count = 0;
};

struct QueryResult {
    std::string payload;  ///< serialized JSON, immutable once cached
    bool cached = false;
};

inline json rate_curve_json(const RateDistortionCurve& c) {
    json pts = json::array();
    for (const auto& p : c.points)
        pts.push_back({{"bit_rate", num(p.bit_rate)}, {"psnr", num(p.psnr)}, {"bound", to_json(p.bound)}});
    json fails = json::array();
    for (const auto& f : c.failures) fails.push_back({{"bound", to_json(f.bound)}, {"message", f.message}});
    return {{"compressor_id", c.compressor_id}, {"points", pts}, {"failures", fails}};
}

/// Runs kernel operations for queries and caches the serialized payloads.
class AnalysisService {
public:
    explicit AnalysisService(AnalysisConfig cfg, std::filesystem::path workdir = default_workdir())
        : cfg_(std::move(cfg)), workdir_(std::move(workdir)) {}

    ~AnalysisService() {
        std::lock_guard g(jobs_mu_);
        for (auto& t : job_threads_)
            if (t.joinable()) t.join();
    }

    AnalysisService(const AnalysisService&) = delete;
    AnalysisService& operator=(const AnalysisService&) = delete;

    [[nodiscard]] const AnalysisConfig& config() const noexcept { return cfg_; }

    [[nodiscard]] json catalog() const {
        json ds = json::array();
        for (const auto& d : cfg_.datasets)
            ds.push_back({{"id", d.id}, {"variable", d.variable_name}, {"dims", d.dims}, {"precision", to_string(d.precision)}});
        json cs = json::array();
        for (const auto& c : cfg_.compressors) {
            json kinds = json::array();
            for (auto k : c.supported_bound_kinds) kinds.push_back(to_string(k));
            cs.push_back({{"id", c.id}, {"bound_kinds", kinds}});
        }
        json an = json::array();
        for (const auto& [_, name] : kAnalysisNames) an.push_back(name);
        json bounds = json::array();
        for (const auto& b : cfg_.bound_sweep) bounds.push_back(to_json(b));
        return {{"datasets", ds}, {"compressors", cs}, {"analyses", an}, {"default_bounds", bounds}};
    }

    /// Cache hit returns the stored bytes; identical concurrent misses compute once.
    QueryResult handle(const AnalysisQuery& q) {
        const auto key = q.canonical_key();
        std::shared_future<std::string> fut;
        std::promise<std::string> mine;
        bool owner = false;
        {
            std::lock_guard g(cache_mu_);
            if (auto it = cache_.find(key); it != cache_.end()) {
                ++it->second.hit_count;
                return {it->second.payload, true};
            }
            if (auto it = inflight_.find(key); it != inflight_.end()) {
                fut = it->second;
            } else {
                fut = mine.get_future().share();
                inflight_.emplace(key, fut);
                owner = true;
            }
        }
        if (!owner) return {fut.get(), true};
        try {
            auto payload = compute(q).dump();
            {
                std::lock_guard g(cache_mu_);
                cache_.emplace(key, CacheEntry{key, payload, std::chrono::system_clock::now(), 0});
                order_.push_back(key);
                while (cache_.size() > cfg_.cache_cap && !order_.empty()) {
                    cache_.erase(order_.front());
                    order_.pop_front();
                }
                inflight_.erase(key);
            }
            mine.set_value(payload);
            return {payload, false};
        } catch (...) {
            {
                std::lock_guard g(cache_mu_);
                inflight_.erase(key);
            }
            mine.set_exception(std::current_exception());
            throw;
        }
    }

    [[nodiscard]] std::optional<CacheEntry> cache_entry(const AnalysisQuery& q) const {
        std::lock_guard g(cache_mu_);
        auto it = cache_.find(q.canonical_key());
        if (it == cache_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] std::size_t cache_size() const {
        std::lock_guard g(cache_mu_);
        return cache_.size();
    }

    struct JobState {
        enum class Status { running, done, failed } status = Status::running;
        QueryResult result;
        std::string error;
        int http_status = 500;
    };

    std::string submit(const AnalysisQuery& q) {
        std::lock_guard g(jobs_mu_);
        const std::string id = "job-" + std::to_string(++job_counter_);
        jobs_[id] = JobState{};
        job_threads_.emplace_back([this, id, q] {
            JobState s;
            try {
                s.result = handle(q);
                s.status = JobState::Status::done;
            } catch (const NotFound& e) {
                s.status = JobState::Status::failed;
                s.error = e.what();
                s.http_status = 404;
            } catch (const BadRequest& e) {
                s.status = JobState::Status::failed;
                s.error = e.what();
                s.http_status = 400;
            } catch (const std::exception& e) {
                s.status = JobState::Status::failed;
                s.error = e.what();
            }
            std::lock_guard g2(jobs_mu_);
            jobs_[id] = std::move(s);
        });
        return id;
    }

    [[nodiscard]] JobState job(const std::string& id) const {
        std::lock_guard g(jobs_mu_);
        auto it = jobs_.find(id);
        if (it == jobs_.end()) throw NotFound("unknown job '" + id + "'");
        return it->second;
    }

    /// Report for one (dataset, compressor, bound); runs the compressor once per key.
    CompressionReport ensure_report(const std::string& dataset_id, const std::string& compressor_id,
                                    const ErrorBoundSpec& bound) {
        const StoreKey key{compressor_id, bound};
        ResultStore* store;
        {
            std::lock_guard g(data_mu_);
            store = &stores_[dataset_id];
        }
        if (auto r = store->find(key)) return *r;
        std::shared_future<CompressionReport> fut;
        std::promise<CompressionReport> mine;
        bool owner = false;
        const auto flight_key = dataset_id + "\n" + key.str();
        {
            std::lock_guard g(data_mu_);
            if (auto r = store->find(key)) return *r;
            if (auto it = report_flights_.find(flight_key); it != report_flights_.end()) {
                fut = it->second;
            } else {
                fut = mine.get_future().share();
                report_flights_.emplace(flight_key, fut);
                owner = true;
            }
        }
        if (!owner) return fut.get();
        try {
            const auto orig = dataset(dataset_id);
            auto report = run_and_report(cfg_.compressor(compressor_id), *orig, bound, workdir_, report_options());
            store->put(key, report, true);
            {
                std::lock_guard g(data_mu_);
                report_flights_.erase(flight_key);
            }
            mine.set_value(report);
            return report;
        } catch (...) {
            {
                std::lock_guard g(data_mu_);
                report_flights_.erase(flight_key);
            }
            mine.set_exception(std::current_exception());
            throw;
        }
    }

    std::shared_ptr<const Dataset> dataset(const std::string& id) {
        std::lock_guard g(load_mu_);
        if (auto it = datasets_.find(id); it != datasets_.end()) return it->second;
        auto d = std::make_shared<const Dataset>(load_dataset(cfg_.dataset(id)));
        datasets_.emplace(id, d);
        return d;
    }

    [[nodiscard]] ReportOptions report_options() const {
        ReportOptions o;
        o.bins = cfg_.histogram_bins;
        o.max_lag = cfg_.max_lag;
        o.spectrum_threshold = cfg_.spectrum_threshold;
        return o;
    }

private:
    json compute(const AnalysisQuery& q) {
        const auto data = dataset(q.dataset_id);
        json out;
        out["analysis"] = to_string(q.analysis);
        out["dataset_id"] = q.dataset_id;
        out["params"] = q.params;
        auto guarded = [](auto&& f) -> json {
            try {
                return f();
            } catch (const UndefinedMetric& e) {
                return json{{"undefined", e.what()}};
            }
        };
        switch (q.analysis) {
            case AnalysisKind::stats: out["result"] = to_json(basic_stats(*data)); return out;
            case AnalysisKind::distribution:
                out["result"] = to_json(distribution(*data, q.params.at("bins").get<std::size_t>()));
                return out;
            case AnalysisKind::entropy_map: {
                const double eb = q.params.at("eb_abs").get<double>();
                auto m = to_json(block_entropy(*data, eb, q.params.at("block").get<std::vector<std::size_t>>()));
                m["global"] = num(entropy(*data, eb));
                out["result"] = m;
                return out;
            }
            case AnalysisKind::autocorrelation:
                out["result"] = guarded([&] { return to_json(autocorrelation(*data, q.params.at("max_lag").get<std::size_t>())); });
                return out;
            case AnalysisKind::psd: out["result"] = {{"power", nums(power_spectrum(*data))}}; return out;
            case AnalysisKind::pca: out["result"] = to_json(pca_summary(*data)); return out;
            case AnalysisKind::rate_distortion: {
                json curves = json::array();
                for (const auto& c : q.compressor_ids) {
                    ResultStore found;
                    std::vector<SweepFailure> errors;
                    for (const auto& b : q.bound_sweep) {
                        try {
                            found.put({c, b}, ensure_report(q.dataset_id, c, b));
                        } catch (const std::exception& e) {
                            errors.push_back({b, e.what()});
                        }
                    }
                    auto curve = curve_from_store(c, q.dataset_id, q.bound_sweep, found);
                    // Replace the generic "no result" entries with the actual failure messages.
                    std::erase_if(curve.failures, [&](const SweepFailure& f) {
                        return std::any_of(errors.begin(), errors.end(), [&](const SweepFailure& e) { return e.bound == f.bound; });
                    });
                    std::vector<SweepFailure> ordered;
                    for (const auto& b : q.bound_sweep) {
                        for (const auto& e : errors)
                            if (e.bound == b) ordered.push_back(e);
                        for (const auto& f : curve.failures)
                            if (f.bound == b) ordered.push_back(f);
                    }
                    curve.failures = std::move(ordered);
                    curves.push_back(rate_curve_json(curve));
                }
                out["curves"] = curves;
                return out;
            }
            default: break;
        }

        json results = json::array();
        for (const auto& c : q.compressor_ids) {
            for (const auto& b : q.bound_sweep) {
                json entry{{"compressor_id", c}, {"bound", to_json(b)}};
                try {
                    const auto r = ensure_report(q.dataset_id, c, b);
                    fill_compression_result(q, *data, r, entry);
                } catch (const UndefinedMetric& e) {
                    entry["undefined"] = e.what();
                } catch (const std::exception& e) {
                    entry["error"] = e.what();
                }
                results.push_back(entry);
            }
        }
        out["results"] = results;
        return out;
    }

    void fill_compression_result(const AnalysisQuery& q, const Dataset& orig, const CompressionReport& r, json& entry) {
        auto recon = [&] { return load_reconstruction(r.run, orig); };
        switch (q.analysis) {
            case AnalysisKind::error_pdf: {
                const auto bins = q.params.at("bins").get<std::size_t>();
                if (bins == cfg_.histogram_bins) entry["result"] = to_json(r.error_pdf);
                else entry["result"] = to_json(error_distribution(pointwise_errors(orig, recon()), bins));
                break;
            }
            case AnalysisKind::distortion:
                entry["result"] = {{"distortion", to_json(r.distortion)},
                                   {"pearson", num(r.pearson)},
                                   {"five_nines", r.pearson ? json(meets_five_nines(*r.pearson)) : json(nullptr)},
                                   {"cr", num(r.run.sizes.cr)},
                                   {"br", num(r.run.sizes.br)},
                                   {"bound_satisfied", r.bound_check.satisfied},
                                   {"max_abs", num(r.bound_check.max_abs)},
                                   {"max_rel", num(r.bound_check.max_rel)}};
                break;
            case AnalysisKind::error_autocorrelation:
                entry["result"] = to_json(error_autocorrelation(pointwise_errors(orig, recon()),
                                                                q.params.at("max_lag").get<std::size_t>()));
                break;
            case AnalysisKind::spectrum_diff:
                entry["result"] = to_json(compare_spectra(orig, recon(), q.params.at("threshold").get<double>()));
                break;
            case AnalysisKind::derived_comparison: {
                const auto kind = *parse_derived_kind(q.params.at("derivative").get<std::string>());
                const auto cmp = compare_derived(orig, recon(), kind, q.params.at("axis").get<std::size_t>());
                entry["result"] = {{"kind", to_string(cmp.kind)}, {"axis", cmp.axis}, {"stats", to_json(cmp.stats)}};
                break;
            }
            case AnalysisKind::speed:
                entry["result"] = {{"comp_seconds", num(r.run.comp_seconds)},
                                   {"decomp_seconds", num(r.run.decomp_seconds)},
                                   {"throughput_comp", num(r.run.throughput_comp)},
                                   {"throughput_decomp", num(r.run.throughput_decomp)},
                                   {"contended", r.run.contended}};
                break;
            default: break;
        }
    }

    AnalysisConfig cfg_;
    std::filesystem::path workdir_;

    mutable std::mutex cache_mu_;
    std::map<std::string, CacheEntry> cache_;
    std::deque<std::string> order_;
    std::map<std::string, std::shared_future<std::string>> inflight_;

    std::mutex data_mu_;
    std::map<std::string, ResultStore> stores_;
    std::map<std::string, std::shared_future<CompressionReport>> report_flights_;

    std::mutex load_mu_;
    std::map<std::string, std::shared_ptr<const Dataset>> datasets_;

    mutable std::mutex jobs_mu_;
    std::map<std::string, JobState> jobs_;
    std::vector<std::thread> job_threads_;
    std::size_t job_counter_ = 0;
};

/// Removes absolute paths and keeps the first line of an error message.
inline std::string sanitize_message(std::string msg) {
    if (auto nl = msg.find('\n'); nl != std::string::npos) msg.resize(nl);
    static const std::regex path_re(R"((/[^\s'":]+)+)");
    return std::regex_replace(msg, path_re, "<path>");
}

inline std::string envelope(const QueryResult& r) {
    return std::string("{\"cached\":") + (r.cached ? "true" : "false") + ",\"payload\":" + r.payload + "}";
}

/// HTTP front end over an AnalysisService.
class HttpServer {
public:
    HttpServer(AnalysisService& service, std::filesystem::path web_root = {}) : service_(service) {
        auto send_json = [](httplib::Response& res, int status, const std::string& body) {
            res.status = status;
            res.set_content(body, "application/json");
        };
        auto send_error = [send_json](httplib::Response& res, int status, const std::string& msg) {
            send_json(res, status, json{{"error", msg}}.dump());
        };

        server_.Get("/api/health", [send_json](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, R"({"status":"ok"})");
        });
        server_.Get("/api/catalog", [this, send_json](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, service_.catalog().dump());
        });
        server_.Post("/api/analyze", [this, send_json, send_error](const httplib::Request& req, httplib::Response& res) {
            try {
                json body;
                try {
                    body = json::parse(req.body);
                } catch (const json::exception& e) {
                    throw BadRequest(std::string("malformed JSON: ") + e.what());
                }
                auto q = parse_query(body, service_.config());
                if (q.analysis == AnalysisKind::rate_distortion && !q.sync && !service_.cache_entry(q)) {
                    send_json(res, 202, json{{"job_id", service_.submit(q)}}.dump());
                    return;
                }
                send_json(res, 200, envelope(service_.handle(q)));
            } catch (const NotFound& e) {
                send_error(res, 404, e.what());
            } catch (const BadRequest& e) {
                send_error(res, 400, e.what());
            } catch (const json::exception& e) {
                send_error(res, 400, std::string("bad request: ") + e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, "analysis failed: " + sanitize_message(e.what()));
            }
        });
        server_.Get(R"(/api/jobs/([A-Za-z0-9\-]+))", [this, send_json, send_error](const httplib::Request& req, httplib::Response& res) {
            try {
                const auto s = service_.job(req.matches[1]);
                using St = AnalysisService::JobState::Status;
                if (s.status == St::running) send_json(res, 200, R"({"status":"running"})");
                else if (s.status == St::done)
                    send_json(res, 200, std::string(R"({"status":"done","cached":)") + (s.result.cached ? "true" : "false") +
                                            ",\"payload\":" + s.result.payload + "}");
                else
                    send_json(res, 200, json{{"status", "failed"}, {"http_status", s.http_status},
                                             {"error", sanitize_message(s.error)}}.dump());
            } catch (const NotFound& e) {
                send_error(res, 404, e.what());
            }
        });

        std::error_code ec;
        if (!web_root.empty() && std::filesystem::is_directory(web_root, ec)) {
            server_.set_mount_point("/", web_root.string());
        } else {
            server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
                res.set_content("<!doctype html><title>zqual</title><p>zqual analysis service. "
                                "The web client is not installed; the JSON API is under /api/.</p>",
                                "text/html");
            });
        }
    }

    /// Binds to an ephemeral port on host; returns the port.
    int bind_any_port(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host.c_str()); }
    bool bind(const std::string& host, int port) { return server_.bind_to_port(host.c_str(), port); }
    bool listen_after_bind() { return server_.listen_after_bind(); }
    bool listen(const std::string& host, int port) { return server_.listen(host.c_str(), port); }
    void stop() { server_.stop(); }
    void wait_until_ready() { server_.wait_until_ready(); }

private:
    AnalysisService& service_;
    httplib::Server server_;
};

}  // namespace zqual

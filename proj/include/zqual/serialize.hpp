#pragma once

// JSON forms of result types. Infinities are written as the strings "inf" / "-inf"; absent values as null.

#include <json.hpp>

#include "zqual/compression.hpp"
#include "zqual/properties.hpp"

namespace zqual {

using json = nlohmann::json;

inline json num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return nullptr;
    return v;
}

inline json num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

inline json nums(std::span<const double> v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

inline double get_num(const json& j) {
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "inf") return HUGE_VAL;
        if (s == "-inf") return -HUGE_VAL;
        throw Error("expected a number, got string '" + s + "'");
    }
    if (j.is_null()) return std::nan("");
    return j.get<double>();
}

inline std::optional<double> get_opt(const json& j) {
    if (j.is_null()) return std::nullopt;
    return get_num(j);
}

inline std::vector<double> get_nums(const json& j) {
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& x : j) v.push_back(get_num(x));
    return v;
}

inline json to_json(const ErrorBoundSpec& b) { return {{"kind", to_string(b.kind)}, {"magnitude", num(b.magnitude)}}; }

inline ErrorBoundSpec bound_from_json(const json& j) {
    if (j.is_string()) {
        auto b = parse_bound(j.get<std::string>());
        if (!b) throw BadRequest("invalid bound '" + j.get<std::string>() + "'");
        return *b;
    }
    if (!j.is_object() || !j.contains("kind") || !j.contains("magnitude"))
        throw BadRequest("bound must be {kind, magnitude} or a string like \"rel:1e-3\"");
    auto kind = parse_bound_kind(j.at("kind").get<std::string>());
    if (!kind) throw BadRequest("invalid bound kind '" + j.at("kind").get<std::string>() + "'");
    const double m = get_num(j.at("magnitude"));
    if (!(m > 0) || std::isinf(m)) throw BadRequest("bound magnitude must be positive");
    return {*kind, m};
}

inline json to_json(const BasicStats& s) {
    return {{"min", num(s.min)}, {"max", num(s.max)}, {"range", num(s.range)}, {"avg", num(s.avg)}};
}

inline json to_json(const Histogram& h) {
    json counts = json::array();
    for (auto c : h.counts) counts.push_back(c);
    return {{"bins", h.bin_count}, {"min", num(h.min)}, {"max", num(h.max)}, {"lower", nums(h.edges)},
            {"counts", counts},     {"pdf", nums(h.pdf)}, {"cdf", nums(h.cdf)}};
}

inline Histogram histogram_from_json(const json& j) {
    Histogram h;
    h.bin_count = j.at("bins").get<std::size_t>();
    h.min = get_num(j.at("min"));
    h.max = get_num(j.at("max"));
    h.edges = get_nums(j.at("lower"));
    for (const auto& c : j.at("counts")) h.counts.push_back(c.get<std::size_t>());
    h.pdf = get_nums(j.at("pdf"));
    h.cdf = get_nums(j.at("cdf"));
    return h;
}

inline json to_json(const AutocorrSeries& a) {
    json lags = json::array();
    for (std::size_t i = 0; i < a.coefficients.size(); ++i) lags.push_back(i);
    return {{"lags", lags}, {"coefficients", nums(a.coefficients)}};
}

inline json to_json(const EntropyMap& m) {
    return {{"eb_abs", num(m.eb_abs)}, {"block_dims", m.block_dims}, {"grid", m.grid}, {"values", nums(m.values)}};
}

inline json to_json(const PcaSummary& p) {
    return {{"singular_values", nums(p.singular_values)},
            {"explained_variance_ratio", nums(p.explained_variance_ratio)},
            {"degenerate", p.degenerate}};
}

inline json to_json(const DistortionStats& s) {
    return {{"value_range", num(s.value_range)}, {"max_abs_err", num(s.max_abs_err)}, {"mean_err", num(s.mean_err)},
            {"max_rel_err", num(s.max_rel_err)},  {"rmse", num(s.rmse)},              {"nrmse", num(s.nrmse)},
            {"psnr", num(s.psnr)}};
}

inline DistortionStats distortion_from_json(const json& j) {
    DistortionStats s;
    s.value_range = get_num(j.at("value_range"));
    s.max_abs_err = get_num(j.at("max_abs_err"));
    s.mean_err = get_num(j.at("mean_err"));
    s.max_rel_err = get_opt(j.at("max_rel_err"));
    s.rmse = get_num(j.at("rmse"));
    s.nrmse = get_opt(j.at("nrmse"));
    s.psnr = get_opt(j.at("psnr"));
    return s;
}

inline json to_json(const SpectrumDiff& d) {
    return {{"bins", d.bins}, {"differences", nums(d.differences)}, {"excluded_bins", d.excluded_bins}};
}

inline json to_json(const SizeMetrics& s) {
    return {{"orig_bytes", s.orig_bytes}, {"comp_bytes", s.comp_bytes}, {"n", s.n}, {"cr", num(s.cr)}, {"br", num(s.br)}};
}

inline json to_json(const CompressionRun& r) {
    return {{"compressor_id", r.compressor_id},
            {"bound", to_json(r.bound)},
            {"eb_abs", num(r.eb_abs)},
            {"comp_bytes", r.comp_bytes},
            {"comp_seconds", num(r.comp_seconds)},
            {"decomp_seconds", num(r.decomp_seconds)},
            {"recon_path", r.recon_path.string()},
            {"sizes", to_json(r.sizes)},
            {"throughput_comp", num(r.throughput_comp)},
            {"throughput_decomp", num(r.throughput_decomp)},
            {"contended", r.contended}};
}

inline CompressionRun run_from_json(const json& j) {
    CompressionRun r;
    r.compressor_id = j.at("compressor_id").get<std::string>();
    r.bound = bound_from_json(j.at("bound"));
    r.eb_abs = get_num(j.at("eb_abs"));
    r.comp_bytes = j.at("comp_bytes").get<std::size_t>();
    r.comp_seconds = get_num(j.at("comp_seconds"));
    r.decomp_seconds = get_num(j.at("decomp_seconds"));
    r.recon_path = j.at("recon_path").get<std::string>();
    const auto& s = j.at("sizes");
    r.sizes = {s.at("orig_bytes").get<std::size_t>(), s.at("comp_bytes").get<std::size_t>(), s.at("n").get<std::size_t>(),
               get_num(s.at("cr")), get_num(s.at("br"))};
    r.throughput_comp = get_num(j.at("throughput_comp"));
    r.throughput_decomp = get_num(j.at("throughput_decomp"));
    r.contended = j.at("contended").get<bool>();
    return r;
}

inline json to_json(const CompressionReport& r) {
    json j;
    j["run"] = to_json(r.run);
    j["distortion"] = to_json(r.distortion);
    j["bound_check"] = {{"max_abs", num(r.bound_check.max_abs)},
                        {"max_rel", num(r.bound_check.max_rel)},
                        {"satisfied", r.bound_check.satisfied}};
    j["pearson"] = num(r.pearson);
    j["error_pdf"] = to_json(r.error_pdf);
    j["error_autocorr"] = r.error_autocorr ? to_json(*r.error_autocorr) : json(nullptr);
    j["spectrum"] = r.spectrum ? to_json(*r.spectrum) : json(nullptr);
    j["wavelet"] = r.wavelet ? to_json(*r.wavelet) : json(nullptr);
    json derived = json::array();
    for (const auto& d : r.derived)
        derived.push_back({{"kind", to_string(d.kind)}, {"axis", d.axis}, {"stats", to_json(d.stats)}});
    j["derived"] = derived;
    return j;
}

inline CompressionReport report_from_json(const json& j) {
    CompressionReport r;
    r.run = run_from_json(j.at("run"));
    r.distortion = distortion_from_json(j.at("distortion"));
    const auto& bc = j.at("bound_check");
    r.bound_check = {get_num(bc.at("max_abs")), get_opt(bc.at("max_rel")), bc.at("satisfied").get<bool>()};
    r.pearson = get_opt(j.at("pearson"));
    r.error_pdf = histogram_from_json(j.at("error_pdf"));
    if (!j.at("error_autocorr").is_null()) r.error_autocorr = AutocorrSeries{get_nums(j.at("error_autocorr").at("coefficients"))};
    if (!j.at("spectrum").is_null()) {
        const auto& s = j.at("spectrum");
        r.spectrum = SpectrumDiff{s.at("bins").get<std::vector<std::size_t>>(), get_nums(s.at("differences")),
                                  s.at("excluded_bins").get<std::vector<std::size_t>>()};
    }
    if (!j.at("wavelet").is_null()) r.wavelet = distortion_from_json(j.at("wavelet"));
    for (const auto& d : j.at("derived")) {
        auto kind = parse_derived_kind(d.at("kind").get<std::string>());
        if (!kind) throw Error("unknown derived kind in stored report");
        r.derived.push_back({*kind, d.at("axis").get<std::size_t>(), distortion_from_json(d.at("stats"))});
    }
    return r;
}

}  // namespace zqual

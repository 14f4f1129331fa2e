#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "zqual/compressor_spec.hpp"
#include "zqual/dataset.hpp"
#include "zqual/error.hpp"
#include "zqual/format.hpp"

namespace zqual {

inline std::vector<ErrorBoundSpec> default_bound_sweep() {
    return {ErrorBoundSpec::relative(1e-1), ErrorBoundSpec::relative(1e-2), ErrorBoundSpec::relative(1e-3),
            ErrorBoundSpec::relative(1e-4), ErrorBoundSpec::relative(1e-5), ErrorBoundSpec::relative(1e-6)};
}

inline std::vector<double> default_entropy_bounds() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

/// Parsed analysis requirements: what to load, which compressors to drive and how to analyze.
struct AnalysisConfig {
    std::vector<DatasetDescriptor> datasets;
    std::vector<CompressorSpec> compressors;
    std::size_t histogram_bins = 1000;
    std::optional<std::vector<std::size_t>> block_dims;
    std::size_t max_lag = 100;
    std::vector<ErrorBoundSpec> bound_sweep = default_bound_sweep();
    /// Absolute bounds at which the truncated entropy is profiled.
    std::vector<double> entropy_bounds = default_entropy_bounds();
    std::filesystem::path output_dir = "zqual-out";
    /// Run the bounds of one sweep concurrently; timings are then flagged as contended.
    bool parallel_sweeps = false;
    std::size_t cache_cap = 1024;
    /// Original DFT amplitudes below threshold x max amplitude are excluded from spectrum comparisons.
    double spectrum_threshold = 1e-12;

    [[nodiscard]] const DatasetDescriptor& dataset(std::string_view id) const {
        for (const auto& d : datasets)
            if (d.id == id) return d;
        throw NotFound("unknown dataset '" + std::string(id) + "'");
    }
    [[nodiscard]] const CompressorSpec& compressor(std::string_view id) const {
        for (const auto& c : compressors)
            if (c.id == id) return c;
        throw NotFound("unknown compressor '" + std::string(id) + "'");
    }

    /// Checks the cross-field invariants. Throws ConfigError with no position.
    void validate() const {
        if (histogram_bins < 2) throw ConfigError(0, 0, "bins must be at least 2");
        if (max_lag < 1) throw ConfigError(0, 0, "max_lag must be positive");
        for (const auto& d : datasets) {
            try {
                d.validate();
            } catch (const DataError& e) {
                throw ConfigError(0, 0, e.what());
            }
            if (max_lag >= d.element_count())
                throw ConfigError(0, 0, "max_lag " + std::to_string(max_lag) + " must be below the size of dataset '" +
                                            d.id + "' (" + std::to_string(d.element_count()) + ")");
            if (block_dims && block_dims->size() != d.dims.size())
                throw ConfigError(0, 0, "block rank does not match dataset '" + d.id + "'");
        }
        if (block_dims)
            for (auto b : *block_dims)
                if (b == 0) throw ConfigError(0, 0, "block dimensions must be positive");
        check_monotone(bound_sweep);
        for (double e : entropy_bounds)
            if (!(e > 0)) throw ConfigError(0, 0, "entropy bounds must be positive");
        if (!(spectrum_threshold >= 0)) throw ConfigError(0, 0, "spectrum_threshold must be non-negative");
        for (const auto& c : compressors) {
            try {
                c.validate();
            } catch (const Error& e) {
                throw ConfigError(0, 0, e.what());
            }
        }
    }

    static void check_monotone(const std::vector<ErrorBoundSpec>& bounds) {
        if (bounds.empty()) throw ConfigError(0, 0, "bound sweep must not be empty");
        bool inc = true, dec = true;
        for (std::size_t i = 1; i < bounds.size(); ++i) {
            inc = inc && bounds[i].magnitude > bounds[i - 1].magnitude;
            dec = dec && bounds[i].magnitude < bounds[i - 1].magnitude;
        }
        if (!inc && !dec) throw ConfigError(0, 0, "bound sweep must be strictly monotone in magnitude");
    }

    friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

namespace detail {

inline std::vector<std::string_view> split_list(std::string_view s, std::string_view seps) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto pos = s.find_first_of(seps, start);
        if (pos == std::string_view::npos) pos = s.size();
        auto item = trim(s.substr(start, pos - start));
        if (!item.empty()) out.push_back(item);
        start = pos + 1;
    }
    return out;
}

struct LineCursor {
    std::size_t line;
    std::size_t value_column;

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(line, value_column, what); }
};

inline std::size_t positive_integer(std::string_view v, const LineCursor& at) {
    auto n = parse_integer(v);
    if (!n || *n <= 0) at.fail("expected a positive integer, got '" + std::string(v) + "'");
    return static_cast<std::size_t>(*n);
}

inline double positive_real(std::string_view v, const LineCursor& at) {
    auto x = parse_double(v);
    if (!x || !(*x > 0) || std::isinf(*x)) at.fail("expected a positive number, got '" + std::string(v) + "'");
    return *x;
}

inline bool boolean(std::string_view v, const LineCursor& at) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    at.fail("invalid enum token '" + std::string(v) + "' (expected true/false)");
}

inline std::vector<std::size_t> dims_list(std::string_view v, const LineCursor& at) {
    std::vector<std::size_t> dims;
    for (auto item : split_list(v, "x,")) dims.push_back(positive_integer(item, at));
    if (dims.empty()) at.fail("expected a dimension list like 100x200");
    return dims;
}

inline std::string join_dims(const std::vector<std::size_t>& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "x" : "") + std::to_string(dims[i]);
    return s;
}

}  // namespace detail

/// Parses the flat `key = value` configuration format with `[dataset:<id>]` and `[compressor:<id>]` sections.
inline AnalysisConfig parse_config(std::string_view text) {
    using detail::LineCursor;
    AnalysisConfig cfg;
    enum class Section { global, dataset, compressor } section = Section::global;
    std::set<std::string> seen_keys;
    std::set<std::string> dataset_ids, compressor_ids;
    std::vector<std::pair<std::size_t, std::string>> pending_dataset_checks;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        auto first = raw.find_first_not_of(" \t");
        if (first == std::string_view::npos) continue;
        std::string_view line = trim(raw);
        if (line.front() == '#' || line.front() == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, first + 1, "unterminated section header");
            auto inner = trim(line.substr(1, line.size() - 2));
            auto colon = inner.find(':');
            if (colon == std::string_view::npos)
                throw ConfigError(line_no, first + 2, "section header must be [dataset:<id>] or [compressor:<id>]");
            auto kind = trim(inner.substr(0, colon));
            std::string id(trim(inner.substr(colon + 1)));
            if (id.empty()) throw ConfigError(line_no, first + 2 + colon, "empty section id");
            if (kind == "dataset") {
                if (!dataset_ids.insert(id).second)
                    throw ConfigError(line_no, first + 1, "duplicate dataset '" + id + "'");
                section = Section::dataset;
                cfg.datasets.emplace_back().id = id;
                cfg.datasets.back().endianness = Endianness::little;
                pending_dataset_checks.emplace_back(line_no, id);
            } else if (kind == "compressor") {
                if (!compressor_ids.insert(id).second)
                    throw ConfigError(line_no, first + 1, "duplicate compressor '" + id + "'");
                section = Section::compressor;
                cfg.compressors.emplace_back().id = id;
            } else {
                throw ConfigError(line_no, first + 2, "unknown section kind '" + std::string(kind) + "'");
            }
            seen_keys.clear();
            continue;
        }

        auto eq = raw.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, first + 1, "syntax error: expected key = value");
        std::string key(trim(raw.substr(0, eq)));
        if (key.empty()) throw ConfigError(line_no, first + 1, "syntax error: missing key");
        auto value_off = raw.find_first_not_of(" \t", eq + 1);
        std::string_view value = trim(raw.substr(eq + 1));
        LineCursor at{line_no, (value_off == std::string_view::npos ? eq + 1 : value_off) + 1};
        if (!seen_keys.insert(key).second)
            throw ConfigError(line_no, first + 1, "duplicate key '" + key + "'");

        auto unknown = [&] { throw ConfigError(line_no, first + 1, "unknown key '" + key + "'"); };

        if (section == Section::global) {
            if (key == "bins") {
                cfg.histogram_bins = detail::positive_integer(value, at);
                if (cfg.histogram_bins < 2) at.fail("bins must be at least 2");
            } else if (key == "max_lag") {
                cfg.max_lag = detail::positive_integer(value, at);
            } else if (key == "block") {
                cfg.block_dims = detail::dims_list(value, at);
            } else if (key == "bounds") {
                cfg.bound_sweep.clear();
                for (auto item : detail::split_list(value, ",")) {
                    auto b = parse_bound(item);
                    if (!b) {
                        auto colon = item.find(':');
                        if (colon != std::string_view::npos && !parse_bound_kind(item.substr(0, colon)))
                            at.fail("invalid enum token '" + std::string(item.substr(0, colon)) + "'");
                        at.fail("invalid bound '" + std::string(item) + "'");
                    }
                    cfg.bound_sweep.push_back(*b);
                }
                if (cfg.bound_sweep.empty()) at.fail("bounds must list at least one bound");
            } else if (key == "entropy_bounds") {
                cfg.entropy_bounds.clear();
                for (auto item : detail::split_list(value, ",")) cfg.entropy_bounds.push_back(detail::positive_real(item, at));
            } else if (key == "output_dir") {
                if (value.empty()) at.fail("output_dir must not be empty");
                cfg.output_dir = std::string(value);
            } else if (key == "parallel_sweeps") {
                cfg.parallel_sweeps = detail::boolean(value, at);
            } else if (key == "cache_cap") {
                cfg.cache_cap = detail::positive_integer(value, at);
            } else if (key == "spectrum_threshold") {
                auto x = parse_double(value);
                if (!x || *x < 0 || std::isinf(*x)) at.fail("expected a non-negative number");
                cfg.spectrum_threshold = *x;
            } else {
                unknown();
            }
        } else if (section == Section::dataset) {
            auto& d = cfg.datasets.back();
            if (key == "path") {
                if (value.empty()) at.fail("path must not be empty");
                d.path = std::string(value);
            } else if (key == "precision") {
                auto p = parse_precision(value);
                if (!p) at.fail("invalid enum token '" + std::string(value) + "' (expected single/double)");
                d.precision = *p;
            } else if (key == "dims") {
                d.dims = detail::dims_list(value, at);
                if (d.dims.size() > 4) at.fail("at most 4 dimensions are supported");
            } else if (key == "endianness") {
                auto e = parse_endianness(value);
                if (!e) at.fail("invalid enum token '" + std::string(value) + "' (expected little/big)");
                d.endianness = *e;
            } else if (key == "variable") {
                d.variable_name = std::string(value);
            } else if (key == "allow_nonfinite") {
                d.allow_nonfinite = detail::boolean(value, at);
            } else {
                unknown();
            }
        } else {
            auto& c = cfg.compressors.back();
            if (key == "compress") {
                c.compress_template = std::string(value);
            } else if (key == "decompress") {
                c.decompress_template = std::string(value);
            } else if (key == "bound_kinds") {
                c.supported_bound_kinds.clear();
                for (auto item : detail::split_list(value, ",")) {
                    auto k = parse_bound_kind(item);
                    if (!k) at.fail("invalid enum token '" + std::string(item) + "'");
                    c.supported_bound_kinds.insert(*k);
                }
            } else {
                unknown();
            }
        }
    }

    for (std::size_t i = 0; i < cfg.datasets.size(); ++i) {
        const auto& d = cfg.datasets[i];
        const auto line = pending_dataset_checks[i].first;
        if (d.path.empty()) throw ConfigError(line, 1, "dataset '" + d.id + "' lacks a path");
        if (d.dims.empty()) throw ConfigError(line, 1, "dataset '" + d.id + "' lacks dims");
    }
    for (const auto& c : cfg.compressors)
        if (c.compress_template.empty() || c.decompress_template.empty())
            throw ConfigError(0, 0, "compressor '" + c.id + "' needs both compress and decompress templates");
    cfg.validate();
    return cfg;
}

/// Emits text that parse_config reads back to an equal configuration.
inline std::string render_config(const AnalysisConfig& cfg) {
    std::ostringstream os;
    os << "bins = " << cfg.histogram_bins << "\n";
    os << "max_lag = " << cfg.max_lag << "\n";
    if (cfg.block_dims) os << "block = " << detail::join_dims(*cfg.block_dims) << "\n";
    os << "bounds = ";
    for (std::size_t i = 0; i < cfg.bound_sweep.size(); ++i) os << (i ? ", " : "") << cfg.bound_sweep[i].str();
    os << "\n";
    os << "entropy_bounds = ";
    for (std::size_t i = 0; i < cfg.entropy_bounds.size(); ++i)
        os << (i ? ", " : "") << format_shortest(cfg.entropy_bounds[i]);
    os << "\n";
    os << "output_dir = " << cfg.output_dir.string() << "\n";
    os << "parallel_sweeps = " << (cfg.parallel_sweeps ? "true" : "false") << "\n";
    os << "cache_cap = " << cfg.cache_cap << "\n";
    os << "spectrum_threshold = " << format_shortest(cfg.spectrum_threshold) << "\n";
    for (const auto& d : cfg.datasets) {
        os << "\n[dataset:" << d.id << "]\n";
        os << "path = " << d.path.string() << "\n";
        os << "precision = " << to_string(d.precision) << "\n";
        os << "dims = " << detail::join_dims(d.dims) << "\n";
        os << "endianness = " << to_string(d.endianness) << "\n";
        if (!d.variable_name.empty()) os << "variable = " << d.variable_name << "\n";
        os << "allow_nonfinite = " << (d.allow_nonfinite ? "true" : "false") << "\n";
    }
    for (const auto& c : cfg.compressors) {
        os << "\n[compressor:" << c.id << "]\n";
        os << "compress = " << c.compress_template << "\n";
        os << "decompress = " << c.decompress_template << "\n";
        os << "bound_kinds = ";
        bool firstk = true;
        for (auto k : c.supported_bound_kinds) {
            os << (firstk ? "" : ", ") << to_string(k);
            firstk = false;
        }
        os << "\n";
    }
    return os.str();
}

inline AnalysisConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, 0, "cannot read configuration file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace zqual

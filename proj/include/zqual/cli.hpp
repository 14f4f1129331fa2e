#pragma once

// Command-line front end. Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <csignal>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zqual/config.hpp"
#include "zqual/driver.hpp"
#include "zqual/profile.hpp"
#include "zqual/report.hpp"
#include "zqual/service.hpp"

namespace zqual {

inline constexpr std::string_view kVersion = "1.0.0";

struct CliOverrides {
    std::string config_path;
    std::string output_dir;
    std::string store_dir;
    std::optional<std::size_t> bins;
    std::optional<std::size_t> max_lag;
    std::string block;
    std::string bounds;
};

/// "16x16x8" -> {16,16,8}
inline std::vector<std::size_t> parse_block_arg(std::string_view s) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto x = s.find_first_of("xX", pos);
        const auto tok = trim(s.substr(pos, x == std::string_view::npos ? std::string_view::npos : x - pos));
        const auto v = parse_integer(tok);
        if (!v || *v <= 0) throw ConfigError(0, 0, "invalid --block '" + std::string(s) + "'");
        out.push_back(static_cast<std::size_t>(*v));
        if (x == std::string_view::npos) break;
        pos = x + 1;
    }
    return out;
}

/// Comma-separated bounds; bare numbers are value-range-relative, "abs:" and "rel:" select explicitly.
inline std::vector<ErrorBoundSpec> parse_bounds_arg(std::string_view s) {
    std::vector<ErrorBoundSpec> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto comma = s.find(',', pos);
        const auto tok = trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        auto b = parse_bound(tok);
        if (!b) throw ConfigError(0, 0, "invalid bound '" + std::string(tok) + "' in --bounds");
        out.push_back(*b);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline AnalysisConfig load_with_overrides(const CliOverrides& o) {
    auto cfg = load_config_file(o.config_path);
    if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
    if (o.bins) cfg.histogram_bins = *o.bins;
    if (o.max_lag) cfg.max_lag = *o.max_lag;
    if (!o.block.empty()) cfg.block_dims = parse_block_arg(o.block);
    if (!o.bounds.empty()) cfg.bound_sweep = parse_bounds_arg(o.bounds);
    cfg.validate();
    return cfg;
}

inline ProfileOptions profile_options(const AnalysisConfig& cfg) {
    ProfileOptions p;
    p.bins = cfg.histogram_bins;
    p.max_lag = cfg.max_lag;
    p.entropy_bounds = cfg.entropy_bounds;
    p.block_dims = cfg.block_dims;
    return p;
}

inline ReportOptions report_options(const AnalysisConfig& cfg) {
    ReportOptions r;
    r.bins = cfg.histogram_bins;
    r.max_lag = cfg.max_lag;
    r.spectrum_threshold = cfg.spectrum_threshold;
    return r;
}

template <class T>
std::vector<T> select_by_id(const std::vector<T>& all, const std::vector<std::string>& ids, const char* what) {
    if (ids.empty()) return all;
    std::vector<T> out;
    for (const auto& id : ids) {
        auto it = std::find_if(all.begin(), all.end(), [&](const T& x) { return x.id == id; });
        if (it == all.end()) throw ConfigError(0, 0, std::string("unknown ") + what + " '" + id + "'");
        out.push_back(*it);
    }
    return out;
}

/// Persists the result store under <dir>/<dataset> when a store directory was requested.
inline void save_store(const ResultStore& store, const fs::path& dir, const std::string& dataset_id) {
    if (!dir.empty()) store.save(dir / file_safe(dataset_id));
}

/// probe: property tables for every selected dataset.
inline void run_probe(const AnalysisConfig& cfg, const std::vector<std::string>& dataset_ids, std::ostream& out) {
    const fs::path root = cfg.output_dir;
    for (const auto& d : select_by_id(cfg.datasets, dataset_ids, "dataset")) {
        const auto data = load_dataset(d);
        const auto report = profile_dataset(data, profile_options(cfg));
        const auto files = write_tables(report, root);
        out << "probe " << d.id << ": " << files.size() << " tables";
        if (!report.autocorr_note.empty()) out << " (autocorrelation " << report.autocorr_note << ")";
        out << "\n";
    }
    finalize_bundle(root);
}

/// check with --recon: evaluates an existing reconstruction against one dataset.
inline void run_check_recon(const AnalysisConfig& cfg, const std::string& dataset_id, const fs::path& recon_path,
                            std::optional<std::uintmax_t> comp_bytes, const fs::path& store_dir, std::ostream& out) {
    const fs::path root = cfg.output_dir;
    const auto& d = cfg.dataset(dataset_id);
    const auto orig = load_dataset(d);
    auto rd = d;
    rd.path = recon_path;
    const auto recon = load_dataset(rd);
    CompressionRun run;
    run.compressor_id = "recon";
    run.bound = cfg.bound_sweep.front();
    run.eb_abs = run.bound.to_absolute(value_range(orig.values()));
    run.comp_bytes = comp_bytes.value_or(d.byte_size());
    run.recon_path = recon_path;
    run.sizes = size_metrics(d.byte_size(), run.comp_bytes, d.element_count(), d.precision);
    const auto report = build_report(orig, recon, run, report_options(cfg));
    write_tables(d.id, report, root);
    write_cr_table(d.id, {report}, root);
    ResultStore store;
    store.put({run.compressor_id, run.bound}, report);
    save_store(store, store_dir, d.id);
    out << "check " << d.id << " " << recon_path.filename().string() << ": cr " << format_shortest(report.run.sizes.cr)
        << " rmse " << format_shortest(report.distortion.rmse) << " bound "
        << (report.bound_check.satisfied ? "satisfied" : "violated") << "\n";
    finalize_bundle(root);
}

/// check / sweep over compressors and bounds. With `curves`, also writes rate-distortion series.
/// Returns the number of failed points.
inline std::size_t run_compressions(const AnalysisConfig& cfg, const std::vector<std::string>& dataset_ids,
                                    const std::vector<std::string>& compressor_ids, bool curves,
                                    const fs::path& store_dir, std::ostream& out) {
    const fs::path root = cfg.output_dir;
    const auto workdir = default_workdir();
    std::vector<TimingRow> timings;
    std::size_t failed = 0;
    for (const auto& d : select_by_id(cfg.datasets, dataset_ids, "dataset")) {
        const auto orig = load_dataset(d);
        ResultStore store;
        std::vector<CompressionReport> reports;
        for (const auto& spec : select_by_id(cfg.compressors, compressor_ids, "compressor")) {
            SweepOptions so;
            so.report = report_options(cfg);
            so.parallel = cfg.parallel_sweeps;
            so.overwrite = true;
            const auto curve = sweep(spec, orig, cfg.bound_sweep, workdir, store, so);
            for (const auto& b : cfg.bound_sweep) {
                auto r = store.find({spec.id, b});
                if (!r) continue;
                write_tables(d.id, *r, root);
                reports.push_back(*r);
                timings.push_back({d.id, r->run});
                out << (curves ? "sweep " : "check ") << d.id << " " << StoreKey{spec.id, b}.str() << ": cr "
                    << format_shortest(r->run.sizes.cr) << " psnr " << format_shortest(r->distortion.psnr.value_or(NAN))
                    << " bound " << (r->bound_check.satisfied ? "satisfied" : "violated") << "\n";
            }
            for (const auto& f : curve.failures) {
                std::cerr << "zqual: " << d.id << " " << StoreKey{spec.id, f.bound}.str() << ": " << f.message << "\n";
                ++failed;
            }
            if (curves) write_curve(curve, root);
        }
        if (!reports.empty()) write_cr_table(d.id, reports, root);
        save_store(store, store_dir, d.id);
    }
    write_timings(timings, root);
    finalize_bundle(root);
    return failed;
}

namespace detail {
inline std::atomic<HttpServer*> g_server{nullptr};
inline void stop_server(int) {
    if (auto* s = g_server.load()) s->stop();
}
}  // namespace detail

inline int run_serve(const AnalysisConfig& cfg, const std::string& host, int port, const std::string& web_root,
                     std::ostream& out) {
    AnalysisService service(cfg);
    HttpServer server(service, web_root);
    if (!server.bind(host, port)) {
        std::cerr << "zqual: error: cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    detail::g_server = &server;
    std::signal(SIGINT, detail::stop_server);
    std::signal(SIGTERM, detail::stop_server);
    out << "zqual serving on http://" << host << ":" << port << "\n" << std::flush;
    server.listen_after_bind();
    detail::g_server = nullptr;
    return 0;
}

inline int cli_main(int argc, char** argv, std::ostream& out = std::cout) {
    CLI::App app{"zqual: data-property profiling and lossy-compression quality assessment"};
    app.require_subcommand(1);
    CliOverrides o;
    std::vector<std::string> dataset_ids, compressor_ids;
    std::string recon, web_root, host = "127.0.0.1";
    std::optional<std::uintmax_t> comp_bytes;
    int port = 8080;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config_path, "configuration file")->required();
        sub->add_option("-o,--output", o.output_dir, "output bundle directory");
        sub->add_option("--bins", o.bins, "histogram bins")->check(CLI::PositiveNumber);
        sub->add_option("--max-lag", o.max_lag, "maximum autocorrelation lag")->check(CLI::PositiveNumber);
        sub->add_option("--block", o.block, "entropy block dimensions, e.g. 16x16");
        sub->add_option("--bounds", o.bounds, "comma-separated bounds; bare numbers are value-range relative");
        sub->add_option("--dataset", dataset_ids, "restrict to these dataset ids");
    };
    auto* probe = app.add_subcommand("probe", "profile the configured datasets");
    common(probe);
    auto* check = app.add_subcommand("check", "compress and assess at each bound, or assess a given reconstruction");
    common(check);
    check->add_option("--compressor", compressor_ids, "restrict to these compressor ids");
    check->add_option("--store", o.store_dir, "also save the keyed result store to this directory");
    check->add_option("--recon", recon, "existing reconstruction to assess against --dataset");
    check->add_option("--comp-bytes", comp_bytes, "compressed size for --recon");
    auto* sweep_cmd = app.add_subcommand("sweep", "rate-distortion sweeps across bounds and compressors");
    common(sweep_cmd);
    sweep_cmd->add_option("--compressor", compressor_ids, "restrict to these compressor ids");
    sweep_cmd->add_option("--store", o.store_dir, "also save the keyed result store to this directory");
    auto* serve = app.add_subcommand("serve", "start the analysis service");
    common(serve);
    serve->add_option("--port", port, "listen port")->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "listen address");
    serve->add_option("--web-root", web_root, "directory of static web client files");
    auto* version = app.add_subcommand("version", "print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "zqual: error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (version->parsed()) {
            out << "zqual " << kVersion << "\n";
            return 0;
        }
        const auto cfg = load_with_overrides(o);
        if (probe->parsed()) {
            run_probe(cfg, dataset_ids, out);
            return 0;
        }
        if (check->parsed()) {
            if (!recon.empty()) {
                if (dataset_ids.size() != 1 && cfg.datasets.size() != 1)
                    throw ConfigError(0, 0, "--recon needs exactly one --dataset");
                run_check_recon(cfg, dataset_ids.empty() ? cfg.datasets.front().id : dataset_ids.front(), recon,
                                comp_bytes, o.store_dir, out);
                return 0;
            }
            return run_compressions(cfg, dataset_ids, compressor_ids, false, o.store_dir, out) == 0 ? 0 : 1;
        }
        if (sweep_cmd->parsed()) return run_compressions(cfg, dataset_ids, compressor_ids, true, o.store_dir, out) == 0 ? 0 : 1;
        if (serve->parsed()) return run_serve(cfg, host, port, web_root, out);
    } catch (const ConfigError& e) {
        std::cerr << "zqual: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "zqual: error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace zqual

#pragma once

// Report bundle writer: comma-delimited tables, Gnuplot scripts and a manifest.
//
//   <root>/properties/<dataset>/*.csv
//   <root>/compression/<dataset>/<compressor>__<kind>_<bound>/*.csv
//   <root>/compression/<dataset>/cr.csv
//   <root>/curves/<dataset>__<compressor>.csv
//   <root>/plots/*.gp
//   <root>/timings.csv            wall-clock fields only; the rest of the bundle is deterministic
//   <root>/manifest.tsv           every artifact above with its source key

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "zqual/checker.hpp"
#include "zqual/compression.hpp"
#include "zqual/driver.hpp"
#include "zqual/format.hpp"
#include "zqual/io.hpp"
#include "zqual/profile.hpp"

namespace zqual {

namespace fs = std::filesystem;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error("table has no column '" + std::string(name) + "'");
    }

    [[nodiscard]] std::vector<double> numbers(std::string_view name) const {
        const auto c = column(name);
        std::vector<double> v;
        for (const auto& r : rows) {
            auto x = parse_double(r.at(c));
            if (!x) throw Error("non-numeric cell '" + r.at(c) + "' in column " + std::string(name));
            v.push_back(*x);
        }
        return v;
    }
};

inline std::string cell(double v) { return format_17g(v); }
inline std::string cell(const std::optional<double>& v) { return v ? format_17g(*v) : "undefined"; }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::vector<std::string> csv_split_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

}  // namespace detail

inline std::string render_table(const Table& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + detail::csv_escape(cells[i]);
        out += "\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

inline void write_table(const fs::path& path, const Table& t) { write_text_atomic(path, render_table(t)); }

inline Table read_table(const fs::path& path) {
    const auto text = read_text_file(path);
    Table t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto cells = detail::csv_split_line(line);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

inline Table histogram_table(const Histogram& h) {
    Table t{{"bin", "lower", "count", "pdf", "cdf"}, {}};
    for (std::size_t i = 0; i < h.bin_count; ++i)
        t.rows.push_back({cell(i), cell(h.edges[i]), cell(h.counts[i]), cell(h.pdf[i]), cell(h.cdf[i])});
    return t;
}

inline Table autocorr_table(const AutocorrSeries& a) {
    Table t{{"lag", "ac"}, {}};
    for (std::size_t i = 0; i < a.coefficients.size(); ++i) t.rows.push_back({cell(i), cell(a.coefficients[i])});
    return t;
}

inline fs::path property_dir(const fs::path& root, const std::string& dataset_id) {
    return root / "properties" / file_safe(dataset_id);
}

inline fs::path compression_dir(const fs::path& root, const std::string& dataset_id, const StoreKey& key) {
    return root / "compression" / file_safe(dataset_id) / key.file_stem();
}

inline fs::path curve_path(const fs::path& root, const std::string& dataset_id, const std::string& compressor_id) {
    return root / "curves" / (file_safe(dataset_id) + "__" + file_safe(compressor_id) + ".csv");
}

/// One table per property series under properties/<dataset>/.
inline std::vector<fs::path> write_tables(const PropertyReport& r, const fs::path& root) {
    const auto dir = property_dir(root, r.dataset_id);
    std::vector<fs::path> written;
    auto put = [&](const std::string& name, const Table& t) {
        write_table(dir / name, t);
        written.push_back(dir / name);
    };
    put("stats.csv", Table{{"min", "max", "range", "avg"},
                           {{cell(r.stats.min), cell(r.stats.max), cell(r.stats.range), cell(r.stats.avg)}}});
    put("pdf.csv", histogram_table(r.distribution));
    Table ent{{"eb_abs", "entropy"}, {}};
    for (const auto& e : r.entropy) ent.rows.push_back({cell(e.eb_abs), cell(e.bits)});
    put("entropy.csv", ent);
    for (const auto& m : r.entropy_maps) {
        Table t;
        for (std::size_t a = 0; a < m.grid.size(); ++a) t.header.push_back("block" + std::to_string(a));
        t.header.push_back("entropy");
        std::size_t k = 0;
        for_each_index(std::vector<std::size_t>(m.grid.size(), 0), m.grid, [&](const std::vector<std::size_t>& idx) {
            std::vector<std::string> row;
            for (auto i : idx) row.push_back(cell(i));
            row.push_back(cell(m.values[k++]));
            t.rows.push_back(std::move(row));
        });
        put("entropy_map_eb" + format_shortest(m.eb_abs) + ".csv", t);
    }
    if (r.autocorr) put("autocorr.csv", autocorr_table(*r.autocorr));
    if (!r.power_spectrum.empty()) {
        Table t{{"bin", "power"}, {}};
        for (std::size_t i = 0; i < r.power_spectrum.size(); ++i) t.rows.push_back({cell(i), cell(r.power_spectrum[i])});
        put("psd.csv", t);
    }
    if (r.pca) {
        Table t{{"component", "singular_value", "explained_variance_ratio"}, {}};
        for (std::size_t i = 0; i < r.pca->explained_variance_ratio.size(); ++i)
            t.rows.push_back({cell(i), cell(i < r.pca->singular_values.size() ? r.pca->singular_values[i] : 0.0),
                              cell(r.pca->explained_variance_ratio[i])});
        put("pca.csv", t);
    }
    if (!r.smoothness.empty()) {
        Table t{{"axis", "order", "mean_abs", "max_abs"}, {}};
        for (const auto& s : r.smoothness)
            t.rows.push_back({cell(s.axis), cell(static_cast<std::size_t>(s.order)), cell(s.mean_abs), cell(s.max_abs)});
        put("smoothness.csv", t);
    }
    return written;
}

/// The deterministic metric/value summary of one compression report (no timing fields).
inline Table summary_table(const CompressionReport& r) {
    const auto& d = r.distortion;
    Table t{{"metric", "value"}, {}};
    auto row = [&](std::string name, std::string v) { t.rows.push_back({std::move(name), std::move(v)}); };
    row("compressor", r.run.compressor_id);
    row("bound_kind", to_string(r.run.bound.kind));
    row("bound", cell(r.run.bound.magnitude));
    row("eb_abs", cell(r.run.eb_abs));
    row("orig_bytes", cell(r.run.sizes.orig_bytes));
    row("comp_bytes", cell(r.run.sizes.comp_bytes));
    row("cr", cell(r.run.sizes.cr));
    row("br", cell(r.run.sizes.br));
    row("value_range", cell(d.value_range));
    row("max_abs_err", cell(d.max_abs_err));
    row("max_rel_err", cell(d.max_rel_err));
    row("mean_err", cell(d.mean_err));
    row("rmse", cell(d.rmse));
    row("nrmse", cell(d.nrmse));
    row("psnr", cell(d.psnr));
    row("pearson", cell(r.pearson));
    row("five_nines", r.pearson ? cell(meets_five_nines(*r.pearson)) : "undefined");
    row("bound_satisfied", cell(r.bound_check.satisfied));
    if (r.wavelet) {
        row("wavelet_rmse", cell(r.wavelet->rmse));
        row("wavelet_nrmse", cell(r.wavelet->nrmse));
        row("wavelet_psnr", cell(r.wavelet->psnr));
    }
    return t;
}

inline std::vector<fs::path> write_tables(const std::string& dataset_id, const CompressionReport& r, const fs::path& root) {
    const StoreKey key{r.run.compressor_id, r.run.bound};
    const auto dir = compression_dir(root, dataset_id, key);
    std::vector<fs::path> written;
    auto put = [&](const std::string& name, const Table& t) {
        write_table(dir / name, t);
        written.push_back(dir / name);
    };
    put("summary.csv", summary_table(r));
    put("error_pdf.csv", histogram_table(r.error_pdf));
    if (r.error_autocorr) put("error_autocorr.csv", autocorr_table(*r.error_autocorr));
    if (r.spectrum) {
        Table t{{"bin", "relative_difference"}, {}};
        for (std::size_t i = 0; i < r.spectrum->bins.size(); ++i)
            t.rows.push_back({cell(r.spectrum->bins[i]), cell(r.spectrum->differences[i])});
        put("spectrum_diff.csv", t);
        Table x{{"bin"}, {}};
        for (auto b : r.spectrum->excluded_bins) x.rows.push_back({cell(b)});
        put("spectrum_excluded.csv", x);
    }
    if (!r.derived.empty()) {
        Table t{{"kind", "axis", "max_abs_err", "rmse", "nrmse", "psnr"}, {}};
        for (const auto& c : r.derived)
            t.rows.push_back({to_string(c.kind), cell(c.axis), cell(c.stats.max_abs_err), cell(c.stats.rmse),
                              cell(c.stats.nrmse), cell(c.stats.psnr)});
        put("derived.csv", t);
    }
    return written;
}

inline Table curve_table(const RateDistortionCurve& c) {
    Table t{{"bit_rate", "psnr", "bound_kind", "bound"}, {}};
    for (const auto& p : c.points)
        t.rows.push_back({cell(p.bit_rate), cell(p.psnr), to_string(p.bound.kind), cell(p.bound.magnitude)});
    return t;
}

inline std::vector<fs::path> write_curve(const RateDistortionCurve& c, const fs::path& root) {
    std::vector<fs::path> written;
    const auto path = curve_path(root, c.dataset_id, c.compressor_id);
    write_table(path, curve_table(c));
    written.push_back(path);
    auto failures = path;
    failures.replace_extension(".failures.csv");
    std::error_code ec;
    if (c.failures.empty()) {
        fs::remove(failures, ec);
    } else {
        Table t{{"bound_kind", "bound", "message"}, {}};
        for (const auto& f : c.failures) t.rows.push_back({to_string(f.bound.kind), cell(f.bound.magnitude), f.message});
        write_table(failures, t);
        written.push_back(failures);
    }
    return written;
}

/// Wide compression-ratio table (one row per bound, one column per compressor) for the bar chart.
inline fs::path write_cr_table(const std::string& dataset_id, const std::vector<CompressionReport>& reports,
                               const fs::path& root) {
    std::vector<std::string> compressors;
    std::map<ErrorBoundSpec, std::map<std::string, double>> grid;
    for (const auto& r : reports) {
        if (std::find(compressors.begin(), compressors.end(), r.run.compressor_id) == compressors.end())
            compressors.push_back(r.run.compressor_id);
        grid[r.run.bound][r.run.compressor_id] = r.run.sizes.cr;
    }
    std::sort(compressors.begin(), compressors.end());
    Table t{{"bound"}, {}};
    for (const auto& c : compressors) t.header.push_back(c);
    for (const auto& [b, row] : grid) {
        std::vector<std::string> cells{b.str()};
        for (const auto& c : compressors) cells.push_back(row.count(c) ? cell(row.at(c)) : "undefined");
        t.rows.push_back(std::move(cells));
    }
    const auto path = root / "compression" / file_safe(dataset_id) / "cr.csv";
    write_table(path, t);
    return path;
}

struct TimingRow {
    std::string dataset_id;
    CompressionRun run;
};

inline fs::path write_timings(const std::vector<TimingRow>& rows, const fs::path& root) {
    Table t{{"dataset", "compressor", "bound_kind", "bound", "comp_seconds", "decomp_seconds", "throughput_comp",
             "throughput_decomp", "contended"},
            {}};
    for (const auto& r : rows)
        t.rows.push_back({r.dataset_id, r.run.compressor_id, to_string(r.run.bound.kind), cell(r.run.bound.magnitude),
                          cell(r.run.comp_seconds), cell(r.run.decomp_seconds), cell(r.run.throughput_comp),
                          cell(r.run.throughput_decomp), cell(r.run.contended)});
    write_table(root / "timings.csv", t);
    return root / "timings.csv";
}

namespace detail {

inline std::string rel(const fs::path& p, const fs::path& base) { return p.lexically_relative(base).generic_string(); }

inline std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view ext) {
    std::vector<fs::path> out;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<fs::path> sorted_dirs(const fs::path& dir) {
    std::vector<fs::path> out;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline std::string gp_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += (c == '\'' ? std::string("''") : std::string(1, c));
    return out + "'";
}

inline std::string gp_preamble(const std::string& output, const std::string& title) {
    return "# Run from the bundle root: gnuplot plots/" + output + ".gp\n"
           "set terminal pngcairo size 900,600\n"
           "set output " + gp_quote("plots/" + output + ".png") + "\n"
           "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "set title " + gp_quote(title) + "\n"
           "set grid\n";
}

}  // namespace detail

/// Generates Gnuplot scripts for the tables present in the bundle. Returns the written paths.
/// Distributions use fillsteps, rate-distortion uses linespoints (one series per compressor),
/// compression ratios use a clustered histogram.
inline std::vector<fs::path> emit_plot_scripts(const fs::path& root) {
    std::vector<fs::path> written;
    const auto plots = root / "plots";
    std::error_code ec;
    fs::remove_all(plots, ec);
    auto put = [&](const std::string& name, const std::string& text) {
        write_text_atomic(plots / (name + ".gp"), text);
        written.push_back(plots / (name + ".gp"));
    };

    for (const auto& dsdir : detail::sorted_dirs(root / "properties")) {
        const auto ds = dsdir.filename().string();
        if (fs::exists(dsdir / "pdf.csv")) {
            put(ds + "_pdf", detail::gp_preamble(ds + "_pdf", "Value distribution: " + ds) +
                                 "set xlabel 'value'\nset ylabel 'probability'\nset style fill solid 0.5\n"
                                 "plot " + detail::gp_quote(detail::rel(dsdir / "pdf.csv", root)) +
                                 " using 2:4 with fillsteps notitle\n");
        }
        if (fs::exists(dsdir / "autocorr.csv")) {
            put(ds + "_autocorr", detail::gp_preamble(ds + "_autocorr", "Autocorrelation: " + ds) +
                                      "set xlabel 'lag'\nset ylabel 'AC'\n"
                                      "plot " + detail::gp_quote(detail::rel(dsdir / "autocorr.csv", root)) +
                                      " using 1:2 with lines notitle\n");
        }
    }

    std::map<std::string, std::vector<fs::path>> curves_by_dataset;
    for (const auto& f : detail::sorted_files(root / "curves", ".csv")) {
        const auto name = f.filename().string();
        if (name.ends_with(".failures.csv")) continue;
        const auto stem = f.stem().string();
        const auto sep = stem.find("__");
        if (sep == std::string::npos) continue;
        curves_by_dataset[stem.substr(0, sep)].push_back(f);
    }
    for (const auto& [ds, files] : curves_by_dataset) {
        std::string s = detail::gp_preamble(ds + "_rate_distortion", "Rate-distortion: " + ds) +
                        "set xlabel 'bit rate (bits/value)'\nset ylabel 'PSNR (dB)'\nplot ";
        for (std::size_t i = 0; i < files.size(); ++i) {
            const auto stem = files[i].stem().string();
            s += (i ? ", \\\n     " : "") + detail::gp_quote(detail::rel(files[i], root)) +
                 " using 1:2 with linespoints title " + detail::gp_quote(stem.substr(stem.find("__") + 2));
        }
        put(ds + "_rate_distortion", s + "\n");
    }

    for (const auto& dsdir : detail::sorted_dirs(root / "compression")) {
        const auto ds = dsdir.filename().string();
        if (fs::exists(dsdir / "cr.csv")) {
            const auto t = read_table(dsdir / "cr.csv");
            std::string s = detail::gp_preamble(ds + "_cr", "Compression ratio: " + ds) +
                            "set style data histograms\nset style histogram clustered\nset style fill solid 0.8\n"
                            "set ylabel 'compression ratio'\nset xtics rotate by -30\nplot ";
            for (std::size_t c = 1; c < t.header.size(); ++c)
                s += (c > 1 ? ", \\\n     " : "") + detail::gp_quote(detail::rel(dsdir / "cr.csv", root)) + " using " +
                     std::to_string(c + 1) + (c == 1 ? ":xtic(1)" : "") + " title " + detail::gp_quote(t.header[c]);
            if (t.header.size() > 1) put(ds + "_cr", s + "\n");
        }
        for (const auto& keydir : detail::sorted_dirs(dsdir)) {
            if (!fs::exists(keydir / "error_pdf.csv")) continue;
            const auto name = ds + "__" + keydir.filename().string() + "_error_pdf";
            put(name, detail::gp_preamble(name, "Error distribution: " + ds + " " + keydir.filename().string()) +
                          "set xlabel 'error'\nset ylabel 'probability'\nset style fill solid 0.5\n"
                          "plot " + detail::gp_quote(detail::rel(keydir / "error_pdf.csv", root)) +
                          " using 2:4 with fillsteps notitle\n");
        }
    }
    return written;
}

struct ManifestEntry {
    std::string path;    ///< relative to the bundle root
    std::string source;  ///< what produced it

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline std::string source_key_for(const std::string& rel_path) {
    const auto parts = [&] {
        std::vector<std::string> p;
        for (const auto& s : fs::path(rel_path)) p.push_back(s.string());
        return p;
    }();
    if (parts.empty()) return "";
    if (parts[0] == "properties" && parts.size() >= 2) return "properties:" + parts[1];
    if (parts[0] == "compression" && parts.size() == 3) return "compression:" + parts[1];
    if (parts[0] == "compression" && parts.size() >= 4) return "compression:" + parts[1] + ":" + parts[2];
    if (parts[0] == "curves") return "curve:" + fs::path(parts.back()).stem().string();
    if (parts[0] == "plots") return "plot:" + fs::path(parts.back()).stem().string();
    if (parts[0] == "timings.csv") return "timings";
    return "other";
}

/// Scans the bundle subtrees and writes manifest.tsv listing every artifact.
inline std::vector<ManifestEntry> write_manifest(const fs::path& root) {
    std::vector<ManifestEntry> entries;
    for (const char* sub : {"properties", "compression", "curves", "plots"}) {
        std::error_code ec;
        if (!fs::is_directory(root / sub, ec)) continue;
        for (const auto& e : fs::recursive_directory_iterator(root / sub))
            if (e.is_regular_file()) {
                const auto r = detail::rel(e.path(), root);
                entries.push_back({r, source_key_for(r)});
            }
    }
    if (fs::exists(root / "timings.csv")) entries.push_back({"timings.csv", "timings"});
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    std::string text;
    for (const auto& e : entries) text += e.path + "\t" + e.source + "\n";
    write_text_atomic(root / "manifest.tsv", text);
    return entries;
}

inline std::vector<ManifestEntry> read_manifest(const fs::path& root) {
    std::vector<ManifestEntry> entries;
    std::istringstream in(read_text_file(root / "manifest.tsv"));
    std::string line;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        entries.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return entries;
}

/// Regenerates plot scripts and the manifest for whatever tables the bundle holds.
inline std::vector<ManifestEntry> finalize_bundle(const fs::path& root) {
    emit_plot_scripts(root);
    return write_manifest(root);
}

}  // namespace zqual

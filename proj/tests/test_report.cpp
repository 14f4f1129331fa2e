#include <gtest/gtest.h>

#include "support.hpp"
#include "zqual/report.hpp"

using namespace zqual;
using testing_support::TempDir;

namespace {

CompressionReport sample_report(const std::string& cid, ErrorBoundSpec bound, const std::filesystem::path& work) {
    auto v = testing_support::uniform_values(512, 1, 2, 5);
    for (auto& x : v) x = static_cast<float>(x);
    const auto d = Dataset::from_values(v, {8, 8, 8}, Precision::single, "ds");
    ReportOptions opt;
    opt.bins = 20;
    opt.max_lag = 10;
    return run_and_report(builtin_compressor(cid, "truncate"), d, bound, work, opt);
}

}  // namespace

TEST(Tables, CsvEscapingRoundTrips) {
    Table t{{"a", "b,c"}, {{"x\"y", "1"}, {"", "line"}}};
    TempDir tmp;
    write_table(tmp / "t.csv", t);
    const auto back = read_table(tmp / "t.csv");
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);
}

TEST(Tables, PdfTableReparsesToExactValues) {
    TempDir tmp;
    const auto h = distribution(testing_support::normal_values(3000, 2), 50);
    write_table(tmp / "pdf.csv", histogram_table(h));
    const auto t = read_table(tmp / "pdf.csv");
    ASSERT_EQ(t.rows.size(), 50u);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(*parse_double(t.rows[i][1]), h.edges[i]);
        EXPECT_EQ(*parse_double(t.rows[i][3]), h.pdf[i]);
        EXPECT_EQ(*parse_double(t.rows[i][4]), h.cdf[i]);
        EXPECT_EQ(std::stoul(t.rows[i][2]), h.counts[i]);
    }
}

TEST(Tables, InfinitePsnrWrittenAsInf) {
    TempDir tmp;
    const auto d = Dataset::from_values({1, 2, 3, 4}, Precision::double_, "ds");
    const auto rep = run_and_report(builtin_compressor("copy", "copy"), d, ErrorBoundSpec::relative(1e-3), tmp / "w");
    const auto t = summary_table(rep);
    bool found = false;
    for (const auto& row : t.rows)
        if (row[0] == "psnr") {
            EXPECT_EQ(row[1], "inf");
            found = true;
        }
    EXPECT_TRUE(found);
}

TEST(Tables, WritesAreDeterministic) {
    TempDir a, b;
    const auto rep = sample_report("t", ErrorBoundSpec::absolute(0.02), a / "w");
    const auto fa = write_tables("ds", rep, a / "bundle");
    const auto fb = write_tables("ds", rep, b / "bundle");
    ASSERT_EQ(fa.size(), fb.size());
    for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(read_text_file(fa[i]), read_text_file(fb[i]));
}

TEST(Plots, EmptyBundleHasNoScripts) {
    TempDir tmp;
    EXPECT_TRUE(emit_plot_scripts(tmp.path()).empty());
    EXPECT_TRUE(write_manifest(tmp.path()).empty());
    EXPECT_EQ(read_text_file(tmp / "manifest.tsv"), "");
}

TEST(Plots, OneCurveGivesLinespointsScript) {
    TempDir tmp;
    RateDistortionCurve c{"trunc", "ds", {{8, 20, ErrorBoundSpec::absolute(1)}, {16, 40, ErrorBoundSpec::absolute(0.1)}}, {}};
    write_curve(c, tmp.path());
    const auto scripts = emit_plot_scripts(tmp.path());
    ASSERT_EQ(scripts.size(), 1u);
    const auto text = read_text_file(scripts[0]);
    EXPECT_NE(text.find("'curves/ds__trunc.csv' using 1:2 with linespoints"), std::string::npos);
}

TEST(Plots, TwoCompressorsShareOneRateDistortionScript) {
    TempDir tmp;
    for (std::string cid : {"alpha", "beta"}) {
        RateDistortionCurve c{cid, "ds", {{8, 20, ErrorBoundSpec::absolute(1)}}, {}};
        write_curve(c, tmp.path());
    }
    const auto entries = finalize_bundle(tmp.path());
    std::size_t rd = 0;
    for (const auto& e : entries)
        if (e.path.starts_with("plots/") && e.path.find("rate_distortion") != std::string::npos) ++rd;
    EXPECT_EQ(rd, 1u);
    const auto text = read_text_file(tmp / "plots/ds_rate_distortion.gp");
    EXPECT_NE(text.find("title 'alpha'"), std::string::npos);
    EXPECT_NE(text.find("title 'beta'"), std::string::npos);
}

TEST(Plots, FailureTableWrittenOnlyForPartialCurves) {
    TempDir tmp;
    RateDistortionCurve c{"x", "ds", {}, {{ErrorBoundSpec::relative(0.1), "boom, with comma"}}};
    write_curve(c, tmp.path());
    const auto t = read_table(tmp / "curves/ds__x.failures.csv");
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0][2], "boom, with comma");
    c.failures.clear();
    write_curve(c, tmp.path());
    EXPECT_FALSE(std::filesystem::exists(tmp / "curves/ds__x.failures.csv"));
}

TEST(Manifest, EnumeratesExactlyTheFilesPresent) {
    TempDir tmp;
    const auto root = tmp / "bundle";
    std::vector<CompressionReport> reps;
    for (auto b : {ErrorBoundSpec::absolute(2), ErrorBoundSpec::absolute(0.02)}) {
        reps.push_back(sample_report("t", b, tmp / "w"));
        write_tables("ds", reps.back(), root);
    }
    write_cr_table("ds", reps, root);
    write_timings({{"ds", reps[0].run}}, root);
    const auto v = testing_support::normal_values(64, 1);
    write_tables(profile_dataset(Dataset::from_values(v, {8, 8}, Precision::double_, "ds"),
                                 ProfileOptions{10, 5, {0.1}, std::vector<std::size_t>{4, 4}, true}),
                 root);
    const auto entries = finalize_bundle(root);
    std::set<std::string> listed;
    for (const auto& e : entries) listed.insert(e.path);
    std::set<std::string> present;
    for (const auto& f : std::filesystem::recursive_directory_iterator(root))
        if (f.is_regular_file()) present.insert(f.path().lexically_relative(root).generic_string());
    present.erase("manifest.tsv");
    EXPECT_EQ(listed, present);
    EXPECT_EQ(read_manifest(root), entries);
    EXPECT_TRUE(listed.count("plots/ds_cr.gp"));
    EXPECT_TRUE(listed.count("plots/ds_pdf.gp"));
    EXPECT_TRUE(listed.count("compression/ds/cr.csv"));
    EXPECT_EQ(source_key_for("compression/ds/t__abs_2/summary.csv"), "compression:ds:t__abs_2");
    const auto cr = read_table(root / "compression/ds/cr.csv");
    EXPECT_EQ(cr.header, (std::vector<std::string>{"bound", "t"}));
    EXPECT_EQ(cr.rows.size(), 2u);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include "support.hpp"
#include "zqual/cli.hpp"

using namespace zqual;
using testing_support::run_cli;
using testing_support::TempDir;

namespace {

/// Temp dir with a 1000-point single-precision dataset in [1, 2) and a config using builtin mocks.
struct Fixture {
    TempDir tmp{"cli"};
    std::filesystem::path cfg = tmp / "zqual.cfg";
    std::filesystem::path data = tmp / "field.f32";

    explicit Fixture(const std::string& globals = "bounds = abs:2, abs:0.02, abs:1e-4\nbins = 20\nmax_lag = 10\n") {
        testing_support::write_raw(data, "field", testing_support::uniform_values(1000, 1, 2, 42), {10, 10, 10});
        write_text_atomic(cfg, globals + "output_dir = " + (tmp / "out").string() +
                                   "\n\n[dataset:field]\npath = " + data.string() +
                                   "\nprecision = single\ndims = 10x10x10\n\n"
                                   "[compressor:trunc]\ncompress = builtin:truncate\ndecompress = builtin:truncate\n\n"
                                   "[compressor:copy]\ncompress = builtin:copy\ndecompress = builtin:copy\n");
    }
};

}  // namespace

TEST(Cli, VersionAndUsageCodes) {
    auto r = run_cli({"version"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find(std::string(kVersion)), std::string::npos);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"probe"}).code, 2);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, ConfigErrorsExitTwo) {
    TempDir tmp;
    write_text_atomic(tmp / "bad.cfg", "bins = nope\n");
    EXPECT_EQ(run_cli({"probe", "-c", (tmp / "bad.cfg").string()}).code, 2);
    EXPECT_EQ(run_cli({"probe", "-c", (tmp / "missing.cfg").string()}).code, 2);
    Fixture f;
    EXPECT_EQ(run_cli({"probe", "-c", f.cfg.string(), "--bounds", "1e-3,1e-2,1e-4"}).code, 2);
    EXPECT_EQ(run_cli({"probe", "-c", f.cfg.string(), "--block", "4x4"}).code, 2);
    EXPECT_EQ(run_cli({"probe", "-c", f.cfg.string(), "--dataset", "nope"}).code, 2);
}

TEST(Cli, RuntimeFailureExitsOne) {
    Fixture f;
    std::filesystem::remove(f.data);
    EXPECT_EQ(run_cli({"probe", "-c", f.cfg.string()}).code, 1);
}

TEST(Cli, ProbeWritesPropertyBundle) {
    Fixture f;
    const auto out = f.tmp / "probe";
    const auto r = run_cli({"probe", "-c", f.cfg.string(), "-o", out.string(), "--block", "5x5x5"});
    ASSERT_EQ(r.code, 0);
    for (const char* name : {"stats.csv", "pdf.csv", "entropy.csv", "autocorr.csv", "psd.csv", "pca.csv", "smoothness.csv"})
        EXPECT_TRUE(std::filesystem::exists(out / "properties/field" / name)) << name;
    EXPECT_TRUE(std::filesystem::exists(out / "properties/field/entropy_map_eb0.1.csv"));
    EXPECT_EQ(read_table(out / "properties/field/pdf.csv").rows.size(), 20u);
    EXPECT_EQ(read_table(out / "properties/field/autocorr.csv").rows.size(), 11u);
    EXPECT_TRUE(std::filesystem::exists(out / "manifest.tsv"));
    EXPECT_TRUE(std::filesystem::exists(out / "plots/field_pdf.gp"));
}

TEST(Cli, ProbeValuesEqualLibraryResults) {
    Fixture f;
    const auto out = f.tmp / "probe";
    ASSERT_EQ(run_cli({"probe", "-c", f.cfg.string(), "-o", out.string(), "--bins", "33"}).code, 0);
    const auto cfg = load_config_file(f.cfg);
    const auto h = distribution(load_dataset(cfg.datasets[0]), 33);
    const auto t = read_table(out / "properties/field/pdf.csv");
    ASSERT_EQ(t.rows.size(), 33u);
    for (std::size_t i = 0; i < 33; ++i) EXPECT_EQ(*parse_double(t.rows[i][3]), h.pdf[i]);
}

TEST(Cli, CheckCopyMockIsLossless) {
    Fixture f;
    const auto out = f.tmp / "check";
    const auto r = run_cli({"check", "-c", f.cfg.string(), "-o", out.string(), "--compressor", "copy", "--bounds", "1e-3"});
    ASSERT_EQ(r.code, 0) << r.out;
    const auto t = read_table(out / "compression/field/copy__rel_0.001/summary.csv");
    std::map<std::string, std::string> m;
    for (const auto& row : t.rows) m[row[0]] = row[1];
    EXPECT_EQ(m["cr"], "1");
    EXPECT_EQ(m["rmse"], "0");
    EXPECT_EQ(m["psnr"], "inf");
    EXPECT_TRUE(std::filesystem::exists(out / "timings.csv"));
    EXPECT_FALSE(std::filesystem::exists(out / "store"));
    EXPECT_FALSE(std::filesystem::exists(out / "curves"));
}

TEST(Cli, CheckGivenReconstruction) {
    Fixture f;
    const auto out = f.tmp / "recon";
    const auto r =
        run_cli({"check", "-c", f.cfg.string(), "-o", out.string(), "--recon", f.data.string(), "--dataset", "field"});
    ASSERT_EQ(r.code, 0) << r.out;
    const auto t = read_table(out / "compression/field/recon__abs_2/summary.csv");
    std::map<std::string, std::string> m;
    for (const auto& row : t.rows) m[row[0]] = row[1];
    EXPECT_EQ(m["cr"], "1");
    EXPECT_EQ(m["rmse"], "0");
    EXPECT_EQ(m["bound_satisfied"], "true");
}

TEST(Cli, SweepCurveMatchesDriver) {
    Fixture f;
    const auto out = f.tmp / "sweep";
    ASSERT_EQ(run_cli({"sweep", "-c", f.cfg.string(), "-o", out.string(), "--compressor", "trunc", "--store",
                       (f.tmp / "store").string()}).code, 0);
    const auto cfg = load_config_file(f.cfg);
    ResultStore store;
    SweepOptions so;
    so.report.bins = cfg.histogram_bins;
    so.report.max_lag = cfg.max_lag;
    const auto curve = sweep(cfg.compressor("trunc"), load_dataset(cfg.datasets[0]), cfg.bound_sweep, f.tmp / "w", store, so);
    EXPECT_EQ(read_text_file(out / "curves/field__trunc.csv"), render_table(curve_table(curve)));
    const auto t = read_table(out / "curves/field__trunc.csv");
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_EQ(t.rows[0][0], "8");
    EXPECT_EQ(t.rows[1][0], "16");
    EXPECT_EQ(t.rows[2][0], "24");
    EXPECT_TRUE(std::filesystem::exists(out / "plots/field_rate_distortion.gp"));
    const auto loaded = ResultStore::load(f.tmp / "store/field");
    EXPECT_EQ(loaded.size(), 3u);
}

TEST(Cli, BundlesDeterministicExceptTimings) {
    Fixture f;
    for (const char* dir : {"run1", "run2"}) {
        const auto out = (f.tmp / dir).string();
        ASSERT_EQ(run_cli({"probe", "-c", f.cfg.string(), "-o", out}).code, 0);
        ASSERT_EQ(run_cli({"sweep", "-c", f.cfg.string(), "-o", out}).code, 0);
    }
    const auto a = testing_support::snapshot(f.tmp / "run1", {"timings.csv"});
    const auto b = testing_support::snapshot(f.tmp / "run2", {"timings.csv"});
    EXPECT_GT(a.size(), 10u);
    EXPECT_EQ(a, b);
}

TEST(Cli, ToolBinaryExitCodes) {
    const std::string bin = ZQUAL_BINARY;
    auto status = [](const std::string& cmd) {
        const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(status(bin + " version"), 0);
    EXPECT_EQ(status(bin + " nonsense"), 2);
    Fixture f;
    EXPECT_EQ(status(bin + " probe -c " + f.cfg.string() + " -o " + (f.tmp / "bin").string()), 0);
}

#include <gtest/gtest.h>

#include "support.hpp"
#include "zqual/config.hpp"

using namespace zqual;

namespace {

std::string base_config(const std::string& extra_global = "", const std::string& extra_dataset = "") {
    return extra_global +
           "\n[dataset:temp]\npath = data/temp.f32\nprecision = single\ndims = 16x16x8\n" + extra_dataset +
           "\n[compressor:copy]\ncompress = builtin:copy\ndecompress = builtin:copy\n";
}

ConfigError config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "expected a ConfigError for:\n" << text;
    return ConfigError(0, 0, "none");
}

}  // namespace

TEST(Config, DefaultsFilled) {
    const auto cfg = parse_config(base_config());
    EXPECT_EQ(cfg.histogram_bins, 1000u);
    EXPECT_EQ(cfg.max_lag, 100u);
    EXPECT_FALSE(cfg.block_dims);
    ASSERT_EQ(cfg.bound_sweep.size(), 6u);
    EXPECT_EQ(cfg.bound_sweep.front(), ErrorBoundSpec::relative(1e-1));
    EXPECT_EQ(cfg.bound_sweep.back(), ErrorBoundSpec::relative(1e-6));
    ASSERT_EQ(cfg.datasets.size(), 1u);
    EXPECT_EQ(cfg.datasets[0].dims, (std::vector<std::size_t>{16, 16, 8}));
    EXPECT_EQ(cfg.datasets[0].path, std::filesystem::path("data/temp.f32"));
    EXPECT_EQ(cfg.dataset("temp").precision, Precision::single);
    EXPECT_THROW((void)cfg.dataset("nope"), NotFound);
    EXPECT_THROW((void)cfg.compressor("nope"), NotFound);
}

TEST(Config, BoundsParsedInOrder) {
    const auto cfg = parse_config(base_config("bounds = 1e-3,1e-4,1e-5"));
    ASSERT_EQ(cfg.bound_sweep.size(), 3u);
    EXPECT_EQ(cfg.bound_sweep[0], ErrorBoundSpec::relative(1e-3));
    EXPECT_EQ(cfg.bound_sweep[1], ErrorBoundSpec::relative(1e-4));
    EXPECT_EQ(cfg.bound_sweep[2], ErrorBoundSpec::relative(1e-5));
}

TEST(Config, MixedBoundKindsAndGlobals) {
    const auto cfg = parse_config(base_config(
        "# comment\n; another\nbins = 64\nmax_lag = 10\nblock = 4x4x2\nbounds = abs:2, abs:0.02, rel:1e-4\n"
        "entropy_bounds = 0.1, 0.01\nparallel_sweeps = true\ncache_cap = 3\nspectrum_threshold = 1e-9\n"
        "output_dir = out/x"));
    EXPECT_EQ(cfg.histogram_bins, 64u);
    EXPECT_EQ(cfg.max_lag, 10u);
    EXPECT_EQ(*cfg.block_dims, (std::vector<std::size_t>{4, 4, 2}));
    EXPECT_EQ(cfg.bound_sweep[1], ErrorBoundSpec::absolute(0.02));
    EXPECT_EQ(cfg.bound_sweep[2], ErrorBoundSpec::relative(1e-4));
    EXPECT_EQ(cfg.entropy_bounds, (std::vector<double>{0.1, 0.01}));
    EXPECT_TRUE(cfg.parallel_sweeps);
    EXPECT_EQ(cfg.cache_cap, 3u);
    EXPECT_EQ(cfg.spectrum_threshold, 1e-9);
    EXPECT_EQ(cfg.output_dir, std::filesystem::path("out/x"));
}

TEST(Config, CommaDimsAndBigEndian) {
    const auto cfg = parse_config(base_config("", "endianness = big\nvariable = T\n").replace(
        base_config().find("16x16x8"), 7, "16, 16, 8"));
    EXPECT_EQ(cfg.datasets[0].dims, (std::vector<std::size_t>{16, 16, 8}));
    EXPECT_EQ(cfg.datasets[0].endianness, Endianness::big);
    EXPECT_EQ(cfg.datasets[0].variable_name, "T");
}

TEST(Config, UnknownKeyReportsPosition) {
    const auto e = config_error(base_config("bins = 10\n  colour = red"));
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 3u);
    EXPECT_NE(std::string(e.what()).find("unknown key 'colour'"), std::string::npos);
}

TEST(Config, InvalidEnumTokenReportsValueColumn) {
    auto text = base_config();
    text.replace(text.find("precision = single"), 18, "precision = half");
    const auto e = config_error(text);
    EXPECT_NE(std::string(e.what()).find("invalid enum token 'half'"), std::string::npos);
    EXPECT_EQ(e.column(), 13u);
    EXPECT_GT(e.line(), 0u);
}

TEST(Config, SyntaxAndDuplicateErrors) {
    EXPECT_EQ(config_error("bins 10\n").line(), 1u);
    EXPECT_EQ(config_error(base_config("bins = 10\nbins = 20")).line(), 2u);
    EXPECT_NE(std::string(config_error(base_config() + "\n[dataset:temp]\npath=x\ndims=4\n").what()).find("duplicate"),
              std::string::npos);
    EXPECT_NE(std::string(config_error("[widget:x]\n").what()).find("unknown section"), std::string::npos);
    EXPECT_NE(std::string(config_error(base_config("bounds = pct:1")).what()).find("invalid enum token 'pct'"),
              std::string::npos);
}

TEST(Config, InvariantViolations) {
    EXPECT_THROW(parse_config(base_config("bins = 1")), ConfigError);
    EXPECT_THROW(parse_config(base_config("bounds = 1e-3, 1e-2, 1e-4")), ConfigError);
    EXPECT_THROW(parse_config(base_config("bounds = 1e-3, 1e-3")), ConfigError);
    EXPECT_THROW(parse_config(base_config("max_lag = 2048")), ConfigError);  // N = 2048
    EXPECT_NO_THROW(parse_config(base_config("max_lag = 2047")));
    EXPECT_THROW(parse_config(base_config("block = 4x4")), ConfigError);
    EXPECT_THROW(parse_config("[dataset:a]\ndims = 4\n"), ConfigError);
    EXPECT_THROW(parse_config("[dataset:a]\npath = x\ndims = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("[dataset:a]\npath = x\ndims = 1x1x1x1x1\n"), ConfigError);
    EXPECT_THROW(parse_config("[compressor:c]\ncompress = sz {input}\n"), ConfigError);
    EXPECT_THROW(parse_config("[compressor:c]\ncompress = sz {input} {bogus} {output}\ndecompress = sz {input} {output}\n"),
                 ConfigError);
    EXPECT_THROW(parse_config("[compressor:c]\ncompress = sz {input}\ndecompress = sz {input} {output}\n"), ConfigError);
}

TEST(Config, ExternalTemplatesAccepted) {
    const auto cfg = parse_config(
        "[compressor:sz]\ncompress = sz -z -f -i {input} -o {output} -M REL -R {eb_rel} -3 {dim1} {dim2} {dim3}\n"
        "decompress = sz -x -f -s {input} -o {output} -3 {dim1} {dim2} {dim3}\nbound_kinds = value_range_relative\n");
    EXPECT_EQ(cfg.compressors[0].supported_bound_kinds, std::set<BoundKind>{BoundKind::value_range_relative});
}

TEST(Config, RenderRoundTrips) {
    const auto a = parse_config(base_config("bins = 33\nblock = 2x2x2\nbounds = abs:1, abs:0.5\nparallel_sweeps = yes",
                                            "endianness = big\nallow_nonfinite = true\n"));
    const auto b = parse_config(render_config(a));
    EXPECT_EQ(a, b);
}

TEST(Config, LoadFileMissingIsConfigError) {
    EXPECT_THROW(load_config_file("/nonexistent/zqual.cfg"), ConfigError);
}

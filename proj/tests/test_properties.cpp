#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "zqual/profile.hpp"
#include "zqual/properties.hpp"

using namespace zqual;
using testing_support::normal_values;
using testing_support::uniform_values;

TEST(BasicStats, KnownValues) {
    const auto s = basic_stats(Dataset::from_values({3, -1, 4, 1, 5}));
    EXPECT_EQ(s.min, -1);
    EXPECT_EQ(s.max, 5);
    EXPECT_EQ(s.range, 6);
    EXPECT_DOUBLE_EQ(s.avg, 2.4);
}

TEST(BasicStats, SkipsMaskedValuesWhenAllowed) {
    DatasetDescriptor d{"m", "", Precision::double_, {4}, Endianness::little, "", true};
    const Dataset ds(d, {1.0, std::numeric_limits<double>::infinity(), 3.0, std::nan("")});
    const auto s = basic_stats(ds);
    EXPECT_EQ(s.min, 1);
    EXPECT_EQ(s.max, 3);
    EXPECT_EQ(s.avg, 2);
    EXPECT_THROW(autocorrelation(ds, 1), DataError);
}

TEST(BasicStats, AverageWithinRangeForRandomData) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto v = uniform_values(1 + seed * 7, -1e3, 1e3, seed);
        const auto s = basic_stats(Dataset::from_values(v));
        EXPECT_LE(s.min, s.avg);
        EXPECT_LE(s.avg, s.max);
    }
}

TEST(Distribution, MatchesCountingOracle) {
    const auto v = uniform_values(5000, -2, 7, 21);
    const auto h = distribution(Dataset::from_values(v), 37);
    ASSERT_EQ(h.bin_count, 37u);
    EXPECT_EQ(h.counts, oracle::histogram_counts(v, 37));
    double total = 0;
    for (double p : h.pdf) total += p;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(h.cdf.back(), 1.0);
    for (std::size_t i = 1; i < h.cdf.size(); ++i) EXPECT_LE(h.cdf[i - 1], h.cdf[i]);
    EXPECT_EQ(h.edges.front(), h.min);
}

TEST(Distribution, ZeroRangeIsSingleBin) {
    const auto h = distribution(Dataset::from_values(std::vector<double>(10, 4.0)), 100);
    EXPECT_EQ(h.bin_count, 1u);
    EXPECT_EQ(h.pdf, std::vector<double>{1.0});
    EXPECT_THROW(distribution(Dataset::from_values({1, 2}), 1), DataError);
}

TEST(Entropy, ConstantIsZero) { EXPECT_EQ(entropy(Dataset::from_values(std::vector<double>(1000, 3.7)), 1e-3), 0.0); }

TEST(Entropy, TwoEquiprobableSymbolsIsOneBit) {
    std::vector<double> v;
    for (int i = 0; i < 500; ++i) {
        v.push_back(0.25);
        v.push_back(1.25);
    }
    EXPECT_EQ(entropy(Dataset::from_values(v), 1.0), 1.0);
}

TEST(Entropy, MatchesBruteForceCounting) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto v = normal_values(1000, seed);
        for (double eb : {1.0, 0.1, 1e-2, 1e-3}) EXPECT_NEAR(entropy(Dataset::from_values(v), eb), oracle::counted_entropy(v, eb), 1e-12);
    }
}

TEST(Entropy, NonIncreasingInBoundForDyadicBounds) {
    const auto v = normal_values(4000, 99);
    double prev = -1;
    for (int k = 10; k >= -12; --k) {
        const double h = entropy(Dataset::from_values(v), std::ldexp(1.0, k));
        if (prev >= 0) {
            EXPECT_GE(h, prev);
        }
        prev = h;
    }
}

TEST(Entropy, RejectsNonPositiveBound) {
    EXPECT_THROW(entropy(Dataset::from_values({1, 2}), 0), DataError);
    EXPECT_THROW(entropy(Dataset::from_values({1, 2}), -1), DataError);
}

TEST(BlockEntropy, WholeDatasetBlockEqualsGlobal) {
    const auto v = normal_values(30 * 20, 4);
    const auto d = Dataset::from_values(v, {30, 20});
    const auto m = block_entropy(d, 1e-2, {30, 20});
    ASSERT_EQ(m.values.size(), 1u);
    EXPECT_NEAR(m.values[0], entropy(d, 1e-2), 1e-12);
}

TEST(BlockEntropy, TilesMatchBruteForcePerTile) {
    const std::size_t r = 13, c = 10;
    const auto v = normal_values(r * c, 8);
    const auto m = block_entropy(Dataset::from_values(v, {r, c}), 0.1, {5, 4});
    ASSERT_EQ(m.grid, (std::vector<std::size_t>{3, 3}));
    for (std::size_t ti = 0; ti < 3; ++ti)
        for (std::size_t tj = 0; tj < 3; ++tj) {
            std::vector<double> tile;
            for (std::size_t i = ti * 5; i < std::min(r, ti * 5 + 5); ++i)
                for (std::size_t j = tj * 4; j < std::min(c, tj * 4 + 4); ++j) tile.push_back(v[i * c + j]);
            EXPECT_NEAR(m.values[ti * 3 + tj], oracle::counted_entropy(tile, 0.1), 1e-12);
        }
}

TEST(BlockEntropy, RejectsBadBlocks) {
    const auto d = Dataset::from_values(std::vector<double>(16, 1.0), {4, 4});
    EXPECT_THROW(block_entropy(d, 0.1, {4}), DataError);
    EXPECT_THROW(block_entropy(d, 0.1, {5, 4}), DataError);
    EXPECT_THROW(block_entropy(d, 0.1, {0, 4}), DataError);
}

TEST(Smoothness, LinearRampHasConstantFirstAndZeroSecondDifference) {
    std::vector<double> v;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 5; ++j) v.push_back(2.0 * i + 0.5 * j);
    const auto d = Dataset::from_values(v, {6, 5});
    const auto s0 = smoothness(d, 0, 1);
    EXPECT_EQ(s0.dims, (std::vector<std::size_t>{5, 5}));
    for (double x : s0.field) EXPECT_EQ(x, 2.0);
    const auto s1 = smoothness(d, 1, 1);
    for (double x : s1.field) EXPECT_EQ(x, 0.5);
    for (double x : smoothness(d, 0, 2).field) EXPECT_EQ(x, 0.0);
    EXPECT_THROW(smoothness(d, 2, 1), DataError);
    EXPECT_THROW(smoothness(d, 0, 3), DataError);
}

TEST(Autocorrelation, MatchesDefinitionOracle) {
    const auto v = normal_values(512, 12);
    const auto ac = autocorrelation(Dataset::from_values(v), 40);
    ASSERT_EQ(ac.coefficients.size(), 41u);
    EXPECT_EQ(ac.coefficients[0], 1.0);
    for (std::size_t t = 1; t <= 40; ++t) EXPECT_NEAR(ac.coefficients[t], oracle::autocorr_at(v, t), 1e-12);
}

TEST(Autocorrelation, BoundedByOne) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto v = uniform_values(200, -1, 1, seed);
        for (std::size_t i = 1; i < v.size(); ++i) v[i] += 0.9 * v[i - 1];
        const auto ac = autocorrelation(v, 50);
        for (double x : ac.coefficients) EXPECT_LE(std::abs(x), 1.0 + 1e-12);
    }
}

TEST(Autocorrelation, ConstantSeriesIsUndefined) {
    EXPECT_THROW(autocorrelation(Dataset::from_values(std::vector<double>(50, 2.0)), 5), UndefinedMetric);
    EXPECT_THROW(autocorrelation(Dataset::from_values({1, 2, 3}), 3), DataError);
}

TEST(Pca, MatchesJacobiOracle) {
    const std::size_t rows = 40, cols = 6;
    auto v = normal_values(rows * cols, 31);
    // Correlate the columns so the spectrum is uneven.
    for (std::size_t r = 0; r < rows; ++r) {
        v[r * cols + 1] += 2 * v[r * cols];
        v[r * cols + 2] -= v[r * cols + 1];
    }
    const auto s = pca_summary(Dataset::from_values(v, {rows, cols}));
    const auto expected = oracle::pca_ratios(v, rows, cols);
    ASSERT_EQ(s.explained_variance_ratio.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(s.explained_variance_ratio[i], expected[i], 1e-10);
    double total = 0;
    for (double r : s.explained_variance_ratio) total += r;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_FALSE(s.degenerate);
}

TEST(Pca, WideMatrixUsesSmallerGram) {
    const std::size_t rows = 5, cols = 30;
    const auto v = normal_values(rows * cols, 2);
    const auto s = pca_summary(Dataset::from_values(v, {rows, cols}));
    const auto expected = oracle::pca_ratios(v, rows, cols);
    ASSERT_EQ(s.explained_variance_ratio.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(s.explained_variance_ratio[i], expected[i], 1e-10);
    EXPECT_NEAR(s.explained_variance_ratio.back(), 0.0, 1e-12);
}

TEST(Pca, IdenticalRowsAreDegenerate) {
    std::vector<double> v;
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 4; ++c) v.push_back(0.1 * c + 1e8);
    const auto s = pca_summary(Dataset::from_values(v, {8, 4}));
    EXPECT_TRUE(s.degenerate);
    EXPECT_EQ(s.explained_variance_ratio, std::vector<double>{1.0});
    EXPECT_THROW(pca_summary(Dataset::from_values({1, 2, 3})), DataError);
}

TEST(PowerSpectrum, SumsToEnergy) {
    const auto v = normal_values(300, 17);
    const auto p = power_spectrum(Dataset::from_values(v, {20, 15}));
    double e = 0, s = 0;
    for (double x : v) e += x * x;
    for (double x : p) s += x;
    EXPECT_NEAR(s, e, 1e-9 * e);
}

TEST(Profile, CollectsEveryProperty) {
    const auto v = normal_values(16 * 8, 3);
    ProfileOptions opt;
    opt.bins = 10;
    opt.max_lag = 5;
    opt.entropy_bounds = {0.1, 0.01};
    opt.block_dims = std::vector<std::size_t>{4, 100};
    const auto r = profile_dataset(Dataset::from_values(v, {16, 8}, Precision::double_, "p"), opt);
    EXPECT_EQ(r.dataset_id, "p");
    EXPECT_EQ(r.entropy.size(), 2u);
    ASSERT_EQ(r.entropy_maps.size(), 2u);
    EXPECT_EQ(r.entropy_maps[0].block_dims, (std::vector<std::size_t>{4, 8}));
    ASSERT_TRUE(r.autocorr);
    EXPECT_EQ(r.autocorr->coefficients.size(), 6u);
    EXPECT_EQ(r.power_spectrum.size(), v.size());
    ASSERT_TRUE(r.pca);
    EXPECT_EQ(r.smoothness.size(), 4u);
}

TEST(Profile, ConstantDatasetNotesUndefinedAutocorrelation) {
    const auto r = profile_dataset(Dataset::from_values(std::vector<double>(64, 1.0)), ProfileOptions{10, 5, {0.1}, {}, true});
    EXPECT_FALSE(r.autocorr);
    EXPECT_NE(r.autocorr_note.find("zero variance"), std::string::npos);
}

#include <gtest/gtest.h>

#include <bit>
#include <cstring>

#include "oracles.hpp"
#include "support.hpp"
#include "zqual/dataset.hpp"
#include "zqual/format.hpp"
#include "zqual/io.hpp"

using namespace zqual;
using testing_support::TempDir;

TEST(Endianness, HostDetectionMatchesByteInspection) {
    const std::uint16_t probe = 1;
    unsigned char first = 0;
    std::memcpy(&first, &probe, 1);
    EXPECT_EQ(detect_host_endianness(), first == 1 ? Endianness::little : Endianness::big);
}

TEST(Decode, BigEndianDoublesMatchShiftOracle) {
    const auto values = testing_support::uniform_values(257, -1e6, 1e6, 7);
    DatasetDescriptor d{"x", "", Precision::double_, {values.size()}, Endianness::big, "", false};
    const auto bytes = encode_values(values, Precision::double_, Endianness::big);
    ASSERT_EQ(bytes.size(), values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t raw = 0;
        std::memcpy(&raw, bytes.data() + 8 * i, 8);
        const auto native = detect_host_endianness() == Endianness::big ? raw : oracle::reverse_bytes64(raw);
        EXPECT_EQ(std::bit_cast<double>(native), values[i]);
    }
    EXPECT_EQ(decode_values(bytes, d), values);
}

TEST(Decode, SingleRoundTripsBothByteOrders) {
    auto values = testing_support::uniform_values(100, -3, 3, 11);
    for (auto& v : values) v = static_cast<float>(v);
    for (auto e : {Endianness::little, Endianness::big}) {
        DatasetDescriptor d{"x", "", Precision::single, {10, 10}, e, "", false};
        const auto bytes = encode_values(values, Precision::single, e);
        ASSERT_EQ(bytes.size(), 400u);
        EXPECT_EQ(decode_values(bytes, d), values);
        std::uint32_t raw = 0;
        std::memcpy(&raw, bytes.data(), 4);
        const bool swapped = e != detect_host_endianness();
        EXPECT_EQ(std::bit_cast<float>(swapped ? oracle::reverse_bytes32(raw) : raw), static_cast<float>(values[0]));
    }
}

TEST(LoadDataset, RoundTripsThroughFile) {
    TempDir tmp;
    const auto values = testing_support::uniform_values(24, 0, 1, 3);
    const auto d = testing_support::write_raw(tmp / "a.f32", "a", values, {2, 3, 4});
    const auto loaded = load_dataset(d);
    EXPECT_EQ(loaded.dims(), (std::vector<std::size_t>{2, 3, 4}));
    for (std::size_t i = 0; i < values.size(); ++i) EXPECT_EQ(loaded.values()[i], static_cast<float>(values[i]));
    EXPECT_EQ(std::filesystem::file_size(d.path), 96u);
}

TEST(LoadDataset, SizeMismatchIsDataError) {
    TempDir tmp;
    auto d = testing_support::write_raw(tmp / "a.f32", "a", std::vector<double>(10, 1.0), {10});
    d.dims = {11};
    EXPECT_THROW(load_dataset(d), DataError);
    d.dims = {10};
    d.precision = Precision::double_;
    EXPECT_THROW(load_dataset(d), DataError);
}

TEST(LoadDataset, MissingFileIsDataError) {
    DatasetDescriptor d{"m", "/nonexistent/zqual/file.raw", Precision::single, {4}, Endianness::little, "", false};
    EXPECT_THROW(load_dataset(d), Error);
}

TEST(DatasetValues, NonFiniteRejectedUnlessAllowed) {
    std::vector<double> v{1.0, std::numeric_limits<double>::quiet_NaN(), 2.0};
    EXPECT_THROW(Dataset::from_values(v), DataError);
    DatasetDescriptor d{"n", "", Precision::double_, {3}, Endianness::little, "", true};
    Dataset ds(d, v);
    EXPECT_TRUE(ds.has_nonfinite());
    EXPECT_THROW(ds.require_finite("test"), DataError);
}

TEST(DatasetValues, RankAndShapeValidated) {
    EXPECT_THROW(Dataset::from_values({1, 2, 3}, {2, 2}), DataError);
    EXPECT_THROW(Dataset::from_values({1}, {1, 1, 1, 1, 1}), DataError);
    EXPECT_THROW(Dataset::from_values({}, {0}), DataError);
    EXPECT_NO_THROW(Dataset::from_values({1, 2, 3, 4}, {1, 2, 1, 2}));
}

TEST(Bounds, ParseForms) {
    EXPECT_EQ(parse_bound("1e-3"), ErrorBoundSpec::relative(1e-3));
    EXPECT_EQ(parse_bound("rel:1e-3"), ErrorBoundSpec::relative(1e-3));
    EXPECT_EQ(parse_bound("abs:0.5"), ErrorBoundSpec::absolute(0.5));
    EXPECT_EQ(parse_bound(" abs:2 "), ErrorBoundSpec::absolute(2));
    EXPECT_FALSE(parse_bound("pct:1"));
    EXPECT_FALSE(parse_bound("0"));
    EXPECT_FALSE(parse_bound("-1e-3"));
    EXPECT_FALSE(parse_bound("inf"));
    EXPECT_FALSE(parse_bound("1e-3x"));
}

TEST(Bounds, StrRoundTripsForRandomMagnitudes) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> e(-12, 3);
    for (int i = 0; i < 500; ++i) {
        const double m = std::pow(10.0, e(rng));
        for (auto b : {ErrorBoundSpec::relative(m), ErrorBoundSpec::absolute(m)}) EXPECT_EQ(parse_bound(b.str()), b);
    }
}

TEST(Bounds, ToAbsolute) {
    EXPECT_EQ(ErrorBoundSpec::relative(1e-2).to_absolute(50), 0.5);
    EXPECT_EQ(ErrorBoundSpec::absolute(0.25).to_absolute(50), 0.25);
}

TEST(Format, SeventeenDigitsRoundTrip) {
    const auto values = testing_support::normal_values(1000, 9);
    for (double v : values) {
        const double x = v * 1e5;
        EXPECT_EQ(*parse_double(format_17g(x)), x);
        EXPECT_EQ(*parse_double(format_shortest(x)), x);
    }
    EXPECT_EQ(format_17g(HUGE_VAL), "inf");
    EXPECT_EQ(format_shortest(-HUGE_VAL), "-inf");
    EXPECT_EQ(*parse_double("inf"), HUGE_VAL);
    EXPECT_EQ(format_17g(0.1), "0.10000000000000001");
}

TEST(Io, AtomicWriteCreatesParents) {
    TempDir tmp;
    const auto p = tmp / "a/b/c.txt";
    write_text_atomic(p, "hello");
    EXPECT_EQ(read_text_file(p), "hello");
    write_text_atomic(p, "again");
    EXPECT_EQ(read_text_file(p), "again");
    EXPECT_EQ(file_safe("a b/c:d@e"), "a_b_c_d_e");
}

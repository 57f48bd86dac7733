#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "support.hpp"
#include "swt/error.hpp"
#include "swt/feature_map.hpp"

namespace swt {
namespace {

using test::Gen;

TEST(FeatureMap, ConstructionAndAccess) {
    FeatureMap f(2, 3, 4, 1.5f);
    EXPECT_EQ(f.size(), 24u);
    EXPECT_EQ(f.pixel_count(), 6u);
    f.at(1, 2, 3) = 7.0f;
    EXPECT_EQ(f.values().back(), 7.0f);
    EXPECT_EQ(f.pixel(5)[3], 7.0f);
    EXPECT_TRUE(f.all_finite());
    f.at(0, 0, 0) = NAN;
    EXPECT_FALSE(f.all_finite());
}

TEST(FeatureMap, RejectsBadShapes) {
    EXPECT_THROW(FeatureMap(0, 3, 1), ShapeError);
    EXPECT_THROW(FeatureMap(2, 2, 1, std::vector<float>(3)), ShapeError);
}

TEST(Partition, SingleWindowIsTheMap) {
    Gen gen(31);
    const FeatureMap f = gen.features(4, 4, 2);
    const WindowSet w = partition_windows(f, 4, 4);
    EXPECT_EQ(w.window_count(), 1u);
    EXPECT_TRUE(std::ranges::equal(w.values, f.values()));
}

TEST(Partition, TopLeftWindowOfFour) {
    Gen gen(32);
    const FeatureMap f = gen.features(8, 8, 3);
    const WindowSet w = partition_windows(f, 4, 4);
    ASSERT_EQ(w.window_count(), 4u);
    const auto first = w.window(0);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            for (int c = 0; c < 3; ++c) {
                EXPECT_EQ(first[(i * 4 + j) * 3 + c], f.at(i, j, c));
            }
        }
    }
    const auto last = w.window(3);
    EXPECT_EQ(last[0], f.at(4, 4, 0));
}

TEST(Partition, RoundTripProperty) {
    Gen gen(33);
    const FeatureMap f = gen.features(64, 128, 8);
    EXPECT_EQ(merge_windows(partition_windows(f, 4, 8)), f);
    for (int trial = 0; trial < 30; ++trial) {
        const int mr = gen.integer(1, 5);
        const int mc = gen.integer(1, 5);
        const FeatureMap g = gen.features(mr * gen.integer(1, 5), mc * gen.integer(1, 5), gen.integer(1, 4));
        ASSERT_EQ(merge_windows(partition_windows(g, mr, mc)), g);
    }
}

TEST(Partition, NonDividingIsShapeError) {
    EXPECT_THROW(partition_windows(FeatureMap(6, 8, 1), 4, 4), ShapeError);
    WindowSet bad(1, 1, 2, 2, 1);
    bad.values.pop_back();
    EXPECT_THROW(merge_windows(bad), ShapeError);
}

TEST(Fmap, RoundTripAndLayout) {
    Gen gen(34);
    const FeatureMap f = gen.features(3, 5, 2);
    const auto bytes = encode_fmap(f);
    ASSERT_EQ(bytes.size(), 4u + 2 + 12 + f.size() * 4);
    EXPECT_EQ(std::memcmp(bytes.data(), "FMAP", 4), 0);
    EXPECT_EQ(bytes[6], 3);
    EXPECT_EQ(bytes[10], 5);
    EXPECT_EQ(bytes[14], 2);
    float first = 0;
    std::memcpy(&first, bytes.data() + 18, 4); // host is little-endian in CI
    EXPECT_EQ(first, f.values()[0]);
    EXPECT_EQ(decode_fmap(bytes), f);

    test::TempDir dir("fmap");
    write_fmap(f, dir / "f.fmap");
    EXPECT_EQ(read_fmap(dir / "f.fmap"), f);
}

TEST(Fmap, RejectsMalformedInput) {
    const auto bytes = encode_fmap(FeatureMap(2, 2, 1, 1.0f));
    EXPECT_THROW(decode_fmap(std::span(bytes).first(bytes.size() - 2)), FormatError);
    auto extra = bytes;
    extra.push_back(1);
    EXPECT_THROW(decode_fmap(extra), FormatError);
    auto magic = bytes;
    magic[3] = 'X';
    EXPECT_THROW(decode_fmap(magic), FormatError);
    auto version = bytes;
    version[4] = 9;
    EXPECT_THROW(decode_fmap(version), FormatError);
    EXPECT_THROW(read_fmap("/nonexistent/x.fmap"), IoError);
}

} // namespace
} // namespace swt

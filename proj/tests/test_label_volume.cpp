#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cardioprec/label_volume.hpp"
#include "cardioprec/types.hpp"

using namespace cardioprec;

TEST(LabelVolume, XFastestIndexing) {
    LabelVolume v({3, 2, 2}, {1, 1, 1});
    EXPECT_EQ(v.index(0, 0, 0), 0u);
    EXPECT_EQ(v.index(1, 0, 0), 1u);
    EXPECT_EQ(v.index(0, 1, 0), 3u);
    EXPECT_EQ(v.index(0, 0, 1), 6u);
    EXPECT_EQ(v.index(2, 1, 1), 11u);
    v.at(2, 1, 1) = 7;
    EXPECT_EQ(v.labels()[11], 7);
    EXPECT_EQ(v.max_label(), 7);
}

TEST(LabelVolume, RejectsLengthMismatch) {
    try {
        LabelVolume({2, 2, 2}, {1, 1, 1}, std::vector<Label>(7));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    }
    EXPECT_THROW(LabelVolume({0, 2, 2}, {1, 1, 1}), Error);
}

TEST(LabelVolume, RejectsBadSpacing) {
    for (double bad : {0.0, -1.0, std::nan(""), std::numeric_limits<double>::infinity()}) {
        try {
            LabelVolume({1, 1, 1}, {1.0, bad, 1.0});
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::NonPositiveSpacing);
        }
    }
}

TEST(LabelVolume, EqualityComparesEverything) {
    LabelVolume a({2, 1, 1}, {1, 1, 1}, {0, 1});
    EXPECT_EQ(a, LabelVolume({2, 1, 1}, {1, 1, 1}, {0, 1}));
    EXPECT_NE(a, LabelVolume({2, 1, 1}, {1, 1, 2}, {0, 1}));
    EXPECT_NE(a, LabelVolume({1, 2, 1}, {1, 1, 1}, {0, 1}));
    EXPECT_NE(a, LabelVolume({2, 1, 1}, {1, 1, 1}, {1, 1}));
}

TEST(Types, NamesRoundTrip) {
    for (Method m : kMethods) EXPECT_EQ(parse_method(to_string(m)), m);
    for (Biomarker b : kBiomarkers) EXPECT_EQ(parse_biomarker(to_string(b)), b);
    for (Structure s : kStructures) EXPECT_EQ(parse_structure(to_string(s)), s);
    for (Scan s : kScans) EXPECT_EQ(parse_scan(to_string(s)), s);
    for (Frame f : kFrames) EXPECT_EQ(parse_frame(to_string(f)), f);
    EXPECT_EQ(to_string(Structure::Myocardium), "LV-myocardium");
    EXPECT_FALSE(parse_method("dropout"));
}

TEST(Error, ValidationClassification) {
    EXPECT_TRUE(Error(ErrorCode::MissingScan, "x").is_validation());
    EXPECT_FALSE(Error(ErrorCode::Io, "x").is_validation());
    const Error e = Error(ErrorCode::InvalidLabel, "voxel 3").with_context("a.cpv");
    EXPECT_EQ(e.code(), ErrorCode::InvalidLabel);
    EXPECT_NE(std::string(e.what()).find("a.cpv"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("voxel 3"), std::string::npos);
}

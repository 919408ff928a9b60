#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "underloc/common/errors.hpp"
#include "underloc/evaluation/ground_truth.hpp"

namespace underloc::evaluation {
namespace {

using dataio::GeodeticPosition;
using dataio::GeoPosition;
using dataio::LocalPosition;

bool same_place(const GeoPosition& q, const GeoPosition& d, double radius,
                GroundTruthOptions o = {}) {
    const std::vector<GeoPosition> qs{q};
    const std::vector<GeoPosition> ds{d};
    return build_ground_truth(qs, ds, radius, o).at(0, 0);
}

/// Great-circle distance written out independently of the library.
double oracle_haversine(double lat1, double lon1, double lat2, double lon2) {
    constexpr double r = 6371008.8;
    const double rad = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * rad;
    const double dlon = (lon2 - lon1) * rad;
    const double a = std::pow(std::sin(dlat / 2), 2) +
                     std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::pow(std::sin(dlon / 2), 2);
    return 2 * r * std::asin(std::sqrt(a));
}

TEST(GroundTruth, IdenticalPositionsMatch) {
    EXPECT_TRUE(same_place(LocalPosition{3, 4, {}}, LocalPosition{3, 4, {}}, 1e-6));
    EXPECT_TRUE(same_place(GeodeticPosition{-42, 147, {}}, GeodeticPosition{-42, 147, {}}, 0.1));
}

TEST(GroundTruth, StrictRadius) {
    EXPECT_FALSE(same_place(LocalPosition{0, 0, {}}, LocalPosition{3, 4, {}}, 5.0));
    EXPECT_TRUE(same_place(LocalPosition{0, 0, {}}, LocalPosition{3, 4, {}}, 5.01));
}

TEST(GroundTruth, EquatorLatitudeStep) {
    // 0.001 deg of latitude is ~111.2 m.
    const GeodeticPosition a{0.0, 10.0, {}};
    const GeodeticPosition b{0.001, 10.0, {}};
    EXPECT_NEAR(oracle_haversine(0, 10, 0.001, 10), 111.19, 0.01);
    EXPECT_FALSE(same_place(a, b, 100.0));
    EXPECT_TRUE(same_place(a, b, 120.0));
}

TEST(GroundTruth, ProjectionAgreesWithHaversine) {
    Rng rng(1);
    for (int t = 0; t < 500; ++t) {
        const double lat0 = rng.uniform(-70, 70);
        const double lon0 = rng.uniform(-179, 179);
        // Sub-kilometre offsets.
        const GeodeticPosition a{lat0 + rng.uniform(-0.004, 0.004), lon0 + rng.uniform(-0.004, 0.004), {}};
        const GeodeticPosition b{lat0 + rng.uniform(-0.004, 0.004), lon0 + rng.uniform(-0.004, 0.004), {}};
        const std::vector<GeodeticPosition> both{a, b};
        const auto proj = EnuProjection::about_centroid(both);
        const auto [ea, na] = proj.project(a);
        const auto [eb, nb] = proj.project(b);
        const double enu = std::hypot(ea - eb, na - nb);
        const double truth = oracle_haversine(a.latitude_deg, a.longitude_deg, b.latitude_deg,
                                              b.longitude_deg);
        EXPECT_LT(std::abs(enu - truth), 1e-3 * truth + 1e-9) << t;
        EXPECT_NEAR(haversine_m(a, b), truth, 1e-6 * truth + 1e-9);
    }
}

TEST(GroundTruth, DepthOnlyWithFlag) {
    const LocalPosition a{0, 0, 0.0};
    const LocalPosition b{0, 0, 4.0};
    GroundTruthOptions flat;
    GroundTruthOptions deep;
    deep.distance_3d = true;
    EXPECT_TRUE(same_place(a, b, 3.0, flat));
    EXPECT_FALSE(same_place(a, b, 3.0, deep));
    EXPECT_TRUE(same_place(a, b, 4.5, deep));
    // Missing depth counts as 0.
    EXPECT_FALSE(same_place(LocalPosition{0, 0, {}}, b, 3.0, deep));
}

TEST(GroundTruth, MixedConventionsThrow) {
    const std::vector<GeoPosition> q{LocalPosition{0, 0, {}}};
    const std::vector<GeoPosition> d{GeodeticPosition{0, 0, {}}};
    EXPECT_THROW(build_ground_truth(q, d, 1.0), ConsistencyError);
}

TEST(GroundTruth, ShapeAndCounts) {
    const std::vector<GeoPosition> q{LocalPosition{0, 0, {}}, LocalPosition{100, 0, {}}};
    const std::vector<GeoPosition> d{LocalPosition{0, 1, {}}, LocalPosition{1, 0, {}},
                                     LocalPosition{50, 0, {}}};
    const auto gt = build_ground_truth(q, d, 2.0);
    EXPECT_EQ(gt.rows(), 3u);
    EXPECT_EQ(gt.cols(), 2u);
    EXPECT_EQ(gt.positives(0), 2u);
    EXPECT_EQ(gt.positives(1), 0u);
    EXPECT_TRUE(gt.has_positive(0));
    EXPECT_FALSE(gt.has_positive(1));
    EXPECT_EQ(gt.queries_with_positives(), 1u);
}

}  // namespace
}  // namespace underloc::evaluation

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "test_support.hpp"
#include "underloc/geometry/homography.hpp"
#include "underloc/geometry/registration.hpp"

namespace underloc::geometry {
namespace {

using matching::Correspondence;
using matching::CorrespondenceSet;
using underloc::testing::project;
using underloc::testing::random_homography;

matching::PixelPoint pt(const Eigen::Vector2d& p) {
    return {p.x(), p.y()};
}

Eigen::Vector2d vec(const matching::PixelPoint& p) { return {p.x, p.y}; }

/// Exact pairs (H0 p_d, p_d) at random database points.
CorrespondenceSet planted(const Eigen::Matrix3d& h0, std::size_t n, Rng& rng) {
    CorrespondenceSet c;
    c.query_image_id = "q";
    c.database_image_id = "d";
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d d(rng.uniform(0, 640), rng.uniform(0, 480));
        c.pairs.push_back({pt(project(h0, d)), pt(d)});
    }
    return c;
}

double max_corner_error(const Homography& h, const Eigen::Matrix3d& h0) {
    double worst = 0.0;
    for (const auto& c : {Eigen::Vector2d(0, 0), Eigen::Vector2d(640, 0), Eigen::Vector2d(0, 480),
                          Eigen::Vector2d(640, 480)}) {
        worst = std::max(worst, (*h.apply(c) - project(h0, c)).norm());
    }
    return worst;
}

/// Independent statement of the bidirectional error: mean of the two RMSEs.
double oracle_error(const Eigen::Matrix3d& h, const CorrespondenceSet& c) {
    const Eigen::Matrix3d inv = h.inverse();
    double fwd = 0.0;
    double bwd = 0.0;
    for (const auto& p : c.pairs) {
        fwd += (vec(p.query) - project(h, vec(p.database))).squaredNorm();
        bwd += (project(inv, vec(p.query)) - vec(p.database)).squaredNorm();
    }
    const double n = static_cast<double>(c.size());
    return 0.5 * (std::sqrt(fwd / n) + std::sqrt(bwd / n));
}

TEST(HomographyType, NormalizesAndRejectsSingular) {
    Eigen::Matrix3d m = 2.0 * Eigen::Matrix3d::Identity();
    const auto h = Homography::from_matrix(m);
    ASSERT_TRUE(h);
    EXPECT_EQ(h->matrix()(2, 2), 1.0);
    EXPECT_EQ(h->matrix()(0, 0), 1.0);
    Eigen::Matrix3d singular = Eigen::Matrix3d::Identity();
    singular(1, 1) = 0.0;
    EXPECT_FALSE(Homography::from_matrix(singular));
    Eigen::Matrix3d zero_corner = Eigen::Matrix3d::Identity();
    zero_corner(2, 2) = 0.0;
    EXPECT_FALSE(Homography::from_matrix(zero_corner));
}

TEST(Dlt, FourExactPairs) {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        const Eigen::Matrix3d h0 = random_homography(rng);
        CorrespondenceSet c;
        // Non-degenerate quadrilateral.
        for (const auto& d : {Eigen::Vector2d(10, 20), Eigen::Vector2d(600, 40),
                              Eigen::Vector2d(580, 450), Eigen::Vector2d(30, 400)}) {
            c.pairs.push_back({pt(project(h0, d)), pt(d)});
        }
        const auto fit = estimate_homography(c);
        ASSERT_EQ(fit.status, FitStatus::ok);
        EXPECT_LT(max_corner_error(*fit.homography, h0), 1e-6);
    }
}

TEST(Dlt, IdentityPairs) {
    CorrespondenceSet c;
    Rng rng(2);
    for (int i = 0; i < 12; ++i) {
        const matching::PixelPoint p{static_cast<double>(rng.uniform_index(640)),
                                     static_cast<double>(rng.uniform_index(480))};
        c.pairs.push_back({p, p});
    }
    const auto fit = estimate_homography(c);
    ASSERT_EQ(fit.status, FitStatus::ok);
    EXPECT_LE((fit.homography->matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(fit.inlier_count, 12u);
}

TEST(Ransac, PlantedOutliers) {
    Rng rng(3);
    for (int t = 0; t < 30; ++t) {
        const Eigen::Matrix3d h0 = random_homography(rng);
        auto c = planted(h0, 20, rng);
        for (int o = 0; o < 8; ++o) {
            const Eigen::Vector2d d(rng.uniform(0, 640), rng.uniform(0, 480));
            const Eigen::Vector2d q = project(h0, d) + Eigen::Vector2d(rng.uniform(30, 80),
                                                                       rng.uniform(-80, -30));
            c.pairs.push_back({pt(q), pt(d)});
        }
        const auto fit = estimate_homography(c);
        ASSERT_EQ(fit.status, FitStatus::ok);
        for (std::size_t i = 0; i < 20; ++i) EXPECT_TRUE(fit.inlier_mask[i]) << i;
        for (std::size_t i = 20; i < 28; ++i) EXPECT_FALSE(fit.inlier_mask[i]) << i;
        for (std::size_t i = 0; i < 20; ++i) {
            const auto& p = c.pairs[i];
            EXPECT_LT((*fit.homography->apply(vec(p.database)) - project(h0, vec(p.database))).norm(),
                      0.1);
        }
    }
}

TEST(Ransac, ScaleBlind) {
    Rng rng(4);
    const Eigen::Matrix3d h0 = random_homography(rng);
    const auto base = planted(h0, 30, rng);
    for (double s : {0.5, 2.0}) {
        const Eigen::Matrix3d scale = Eigen::Vector3d(s, s, 1.0).asDiagonal();
        const Eigen::Matrix3d hs = scale * h0 * scale.inverse();
        CorrespondenceSet c = base;
        for (auto& p : c.pairs) {
            p.query = {s * p.query.x, s * p.query.y};
            p.database = {s * p.database.x, s * p.database.y};
        }
        const auto fit = estimate_homography(c);
        ASSERT_EQ(fit.status, FitStatus::ok);
        for (const auto& p : c.pairs) {
            EXPECT_LT((*fit.homography->apply(vec(p.database)) - project(hs, vec(p.database))).norm(),
                      0.1);
        }
    }
}

TEST(Ransac, InsufficientAndDegenerate) {
    CorrespondenceSet three;
    three.pairs = {{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}};
    EXPECT_EQ(estimate_homography(three).status, FitStatus::insufficient_matches);

    CorrespondenceSet line;
    for (int i = 0; i < 10; ++i) {
        line.pairs.push_back({{double(i), 2.0 * i},
                              {double(i), 2.0 * i}});
    }
    EXPECT_EQ(estimate_homography(line).status, FitStatus::degenerate);
}

TEST(Ransac, DeterministicUnderSeed) {
    Rng rng(5);
    const Eigen::Matrix3d h0 = random_homography(rng);
    auto c = planted(h0, 60, rng);
    for (int o = 0; o < 40; ++o) {
        c.pairs.push_back({{rng.uniform(0, 640), rng.uniform(0, 480)},
                           {rng.uniform(0, 640), rng.uniform(0, 480)}});
    }
    RansacOptions o;
    o.seed = 99;
    const auto a = estimate_homography(c, o);
    const auto b = estimate_homography(c, o);
    EXPECT_EQ(a.inlier_mask, b.inlier_mask);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(a.homography->matrix(), b.homography->matrix());
}

TEST(ReprojectionError, HandExample) {
    CorrespondenceSet c;
    c.pairs = {{{13.0f, 24.0f}, {10.0f, 20.0f}}};
    EXPECT_EQ(reprojection_error(Homography::identity(), c), 5.0);
}

TEST(ReprojectionError, ZeroForConsistentPairs) {
    CorrespondenceSet c;
    c.pairs = {{{1, 2}, {1, 2}}, {{5, 7}, {5, 7}}};
    EXPECT_EQ(reprojection_error(Homography::identity(), c), 0.0);
    Rng rng(6);
    const Eigen::Matrix3d h0 = random_homography(rng);
    EXPECT_LT(reprojection_error(*Homography::from_matrix(h0), planted(h0, 25, rng)), 1e-9);
}

TEST(ReprojectionError, MatchesOracleAndIsSymmetric) {
    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        const Eigen::Matrix3d h0 = random_homography(rng);
        const auto h = *Homography::from_matrix(h0);
        CorrespondenceSet c;
        for (int i = 0; i < 15; ++i) {
            c.pairs.push_back({{rng.uniform(0, 640), rng.uniform(0, 480)},
                               {rng.uniform(0, 640), rng.uniform(0, 480)}});
        }
        const double e = reprojection_error(h, c);
        EXPECT_NEAR(e, oracle_error(h0, c), 1e-9 * std::max(1.0, e));
        EXPECT_NEAR(reprojection_error(h.inverse(), c.swapped()), e, 1e-9 * std::max(1.0, e));
        EXPECT_GE(e, 0.0);
    }
}

TEST(ReprojectionError, PointAtInfinityIsInfinite) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(2, 0) = 1.0;  // w = x + 1, zero at x = -1
    m(2, 2) = 1.0;
    const auto h = Homography::from_matrix(m);
    ASSERT_TRUE(h);
    CorrespondenceSet c;
    c.pairs = {{{0, 0}, {-1.0f, 5.0f}}};
    EXPECT_EQ(reprojection_error(*h, c), std::numeric_limits<double>::infinity());
}

TEST(ReprojectionError, InlierMaskSelectsPairs) {
    CorrespondenceSet c;
    c.pairs = {{{0, 0}, {0, 0}}, {{10, 0}, {0, 0}}};
    const std::vector<std::uint8_t> only_first{1, 0};
    EXPECT_EQ(reprojection_error(Homography::identity(), c, only_first), 0.0);
    EXPECT_DOUBLE_EQ(reprojection_error(Homography::identity(), c), std::sqrt(50.0));
    const std::vector<std::uint8_t> none{0, 0};
    EXPECT_THROW(reprojection_error(Homography::identity(), c, none), std::invalid_argument);
}

RegistrationResult with_error(std::optional<double> e) {
    RegistrationResult r;
    r.reprojection_error_px = e;
    r.homography = Homography::identity();
    r.status = RegistrationStatus::accepted;
    return r;
}

TEST(ChiFilter, BoundaryIsInclusive) {
    std::vector<RegistrationResult> rs{with_error(2.0), with_error(10.0), with_error(10.01),
                                       with_error(std::numeric_limits<double>::infinity())};
    const auto kept = filter_by_threshold(rs, 10.0);
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(kept[0].reprojection_error_px, 2.0);
    EXPECT_EQ(kept[1].reprojection_error_px, 10.0);
    EXPECT_EQ(rs[2].status, RegistrationStatus::rejected_error_above_threshold);
    EXPECT_EQ(rs[3].status, RegistrationStatus::rejected_error_above_threshold);

    std::vector<RegistrationResult> empty;
    EXPECT_TRUE(filter_by_threshold(empty, 10.0).empty());

    std::vector<RegistrationResult> no_error{with_error(std::nullopt)};
    no_error[0].status = RegistrationStatus::rejected_degenerate;
    EXPECT_TRUE(filter_by_threshold(no_error, 10.0).empty());
    EXPECT_EQ(no_error[0].status, RegistrationStatus::rejected_degenerate);
}

TEST(RegisterPair, StatusesAndJson) {
    Rng rng(8);
    const Eigen::Matrix3d h0 = random_homography(rng);
    const auto good = register_pair(planted(h0, 30, rng));
    EXPECT_EQ(good.status, RegistrationStatus::accepted);
    EXPECT_EQ(good.correspondence_count, 30u);
    const auto j = to_json(good);
    EXPECT_EQ(j["status"], "accepted");
    EXPECT_EQ(j["homography"].size(), 9u);
    EXPECT_EQ(j["query_id"], "q");

    CorrespondenceSet few;
    few.pairs = {{{0, 0}, {0, 0}}};
    const auto r = register_pair(few);
    EXPECT_EQ(r.status, RegistrationStatus::rejected_insufficient_matches);
    EXPECT_TRUE(to_json(r)["homography"].is_null());
    EXPECT_TRUE(to_json(r)["reprojection_error_px"].is_null());

    // Half the pairs are far off: RANSAC finds H0 but e_r over all pairs
    // exceeds chi.
    auto mixed = planted(h0, 20, rng);
    for (int i = 0; i < 12; ++i) {
        mixed.pairs.push_back({{rng.uniform(0, 640), rng.uniform(0, 480)},
                               {rng.uniform(0, 640), rng.uniform(0, 480)}});
    }
    const auto all = register_pair(mixed);
    EXPECT_EQ(all.status, RegistrationStatus::rejected_error_above_threshold);
    RegistrationOptions inliers_only;
    inliers_only.inlier_only_error = true;
    EXPECT_EQ(register_pair(mixed, inliers_only).status, RegistrationStatus::accepted);

    for (auto s : {RegistrationStatus::accepted, RegistrationStatus::rejected_degenerate,
                   RegistrationStatus::rejected_error_above_threshold,
                   RegistrationStatus::rejected_insufficient_matches}) {
        EXPECT_EQ(registration_status_from_string(to_string(s)), s);
    }
}

}  // namespace
}  // namespace underloc::geometry

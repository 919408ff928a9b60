#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "underloc/dataio/manifest.hpp"
#include "underloc/evaluation/ground_truth.hpp"
#include "underloc/maskops/maskops.hpp"
#include "underloc/synth/survey.hpp"

namespace underloc::synth {
namespace {

using underloc::testing::TempDir;

SurveyOptions small(std::uint64_t seed = 5) {
    SurveyOptions o;
    o.seed = seed;
    o.n_views = 9;
    o.passes = 2;
    return o;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

TEST(Synth, ParameterValidation) {
    auto o = small();
    o.n_views = 1;
    EXPECT_THROW(generate_survey(o), std::invalid_argument);
    o = small();
    o.overlap_fraction = 1.0;
    EXPECT_THROW(generate_survey(o), std::invalid_argument);
    o = small();
    o.world_width = 100;  // narrower than a single 160 px view
    EXPECT_THROW(generate_survey(o), std::invalid_argument);
}

TEST(Synth, SameSeedSameBytes) {
    TempDir a("synth_a");
    TempDir b("synth_b");
    write_survey(generate_survey(small()), a.path());
    write_survey(generate_survey(small()), b.path());
    for (const char* f : {"database.jsonl", "query.jsonl", "homographies.json", "database.uld",
                          "query.ulk", "images/p1_v0004.pgm", "masks/p0_v0002.pgm"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
        EXPECT_FALSE(slurp(a / f).empty()) << f;
    }
    TempDir c("synth_c");
    write_survey(generate_survey(small(6)), c.path());
    EXPECT_NE(slurp(a / "images/p0_v0000.pgm"), slurp(c / "images/p0_v0000.pgm"));
}

TEST(Synth, WrittenDatasetLoads) {
    TempDir dir;
    const auto s = generate_survey(small());
    write_survey(s, dir.path());
    const auto db = dataio::load_manifest(dir / "database.jsonl");
    const auto q = dataio::load_manifest(dir / "query.jsonl");
    EXPECT_EQ(db.size(), 9u);
    EXPECT_EQ(q.size(), 9u);
    ASSERT_TRUE(db.descriptors && db.keypoints);
    EXPECT_EQ(db.descriptors->dimension, 256u);
    EXPECT_GT((*db.keypoints)[0].size(), 20u);
    EXPECT_EQ(db.localization_radius_m, s.localization_radius_m);
}

TEST(Synth, HomographiesCompose) {
    auto o = small();
    o.yaw_jitter_deg = 8.0;
    o.scale_jitter = 0.05;
    o.revisit_offset_px = 6.0;
    const auto s = generate_survey(o);
    const std::size_t n = s.views.size();
    for (std::size_t i = 0; i < n; i += 2) {
        for (std::size_t j = 1; j < n; j += 3) {
            for (std::size_t k = 0; k < n; k += 4) {
                Eigen::Matrix3d composed = s.homography(j, k) * s.homography(i, j);
                composed /= composed(2, 2);
                EXPECT_LT((composed - s.homography(i, k)).norm(), 1e-9);
            }
        }
    }
}

TEST(Synth, AlongTrackNeighboursAreIntegerTranslations) {
    const auto s = generate_survey(small());
    // Lawnmower legs of 3 views: v0 -> v1 is one along-track step.
    const int step = static_cast<int>(std::lround(160 * (1.0 - 0.6)));
    Eigen::Matrix3d expected = Eigen::Matrix3d::Identity();
    expected(0, 2) = step;  // a world point appears `step` px further right in v0
    EXPECT_EQ(s.homography(1, 0), expected);
    // Identical passes: the revisit of a view is exactly the same window.
    EXPECT_EQ(s.homography(0, 9), Eigen::Matrix3d::Identity());
}

TEST(Synth, ZeroOverlapGivesDiagonalGroundTruth) {
    auto o = small();
    o.overlap_fraction = 0.0;
    const auto s = generate_survey(o);
    const auto db = survey_manifest(s, dataio::DatasetRole::database);
    const auto q = survey_manifest(s, dataio::DatasetRole::query);
    const auto gt = evaluation::build_ground_truth(q.positions(), db.positions(),
                                                   db.localization_radius_m);
    for (std::size_t j = 0; j < db.size(); ++j) {
        for (std::size_t i = 0; i < q.size(); ++i) EXPECT_EQ(gt.at(j, i), i == j);
    }
    for (const auto& p : s.overlaps) EXPECT_EQ(p.to, p.from + 9) << p.from << "->" << p.to;
}

/// Warps the `to` view mask into the `from` frame under the true homography.
struct WarpedPair {
    dataio::BinaryMask database;
    dataio::BinaryMask warped;
    dataio::BinaryMask region;
};

WarpedPair warp_true(const SyntheticSurvey& s, std::size_t from, std::size_t to) {
    // Query = `to`, database = `from`; H maps database to query pixels.
    const auto& dv = s.views[from];
    const auto& qv = s.views[to];
    const auto h = *geometry::Homography::from_matrix(s.homography(from, to));
    return {dv.mask, maskops::warp_mask(qv.mask, h, dv.mask.width, dv.mask.height),
            maskops::warp_footprint(h, qv.mask.width, qv.mask.height, dv.mask.width,
                                    dv.mask.height)};
}

TEST(Synth, AlignedMasksAgreeExactly) {
    const auto s = generate_survey(small());
    std::size_t checked = 0;
    for (const auto& p : s.overlaps) {
        const auto w = warp_true(s, p.from, p.to);
        for (std::size_t i = 0; i < w.region.bits.size(); ++i) {
            if (!w.region.bits[i]) continue;
            ASSERT_EQ(w.database.bits[i], w.warped.bits[i]) << p.from << "->" << p.to;
        }
        ++checked;
    }
    EXPECT_GT(checked, 0u);
}

TEST(Synth, JitteredMasksDisagreeOnlyAtBoundaries) {
    auto o = small();
    o.yaw_jitter_deg = 5.0;
    o.revisit_offset_px = 4.0;
    const auto s = generate_survey(o);
    std::size_t disagreements = 0;
    for (const auto& p : s.overlaps) {
        const auto w = warp_true(s, p.from, p.to);
        const auto& d = w.database;
        for (int y = 0; y < d.height; ++y) {
            for (int x = 0; x < d.width; ++x) {
                if (!w.region.at(x, y) || d.at(x, y) == w.warped.at(x, y)) continue;
                ++disagreements;
                // Nearest-pixel sampling moves a boundary by under one pixel,
                // so a disagreeing pixel has a differing neighbour.
                bool near_edge = false;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = x + dx, yy = y + dy;
                        // Beyond the frame the mask is unknown and may change.
                        near_edge = near_edge || xx < 0 || yy < 0 || xx >= d.width ||
                                    yy >= d.height || d.at(xx, yy) != d.at(x, y);
                    }
                }
                EXPECT_TRUE(near_edge) << p.from << "->" << p.to << " at " << x << "," << y;
            }
        }
    }
    EXPECT_GT(disagreements, 0u);
}

TEST(Synth, PerturbationOnlyTouchesRevisits) {
    auto o = small();
    o.perturbation.brightness_gain = 0.7;
    o.perturbation.additive_noise_sigma = 5.0 / 255.0;
    const auto base = generate_survey(small());
    const auto pert = generate_survey(o);
    EXPECT_EQ(base.views[0].image.pixels, pert.views[0].image.pixels);
    EXPECT_NE(base.views[9].image.pixels, pert.views[9].image.pixels);
    // Zero perturbation: the revisit renders exactly the same pixels.
    EXPECT_EQ(base.views[0].image.pixels, base.views[9].image.pixels);
}

TEST(Synth, TransectPattern) {
    auto o = small();
    o.pattern = TrajectoryPattern::transect;
    o.n_views = 5;
    const auto s = generate_survey(o);
    ASSERT_EQ(s.views.size(), 10u);
    for (std::size_t v = 1; v < 5; ++v) {
        const auto& a = std::get<dataio::LocalPosition>(s.views[v - 1].record.position);
        const auto& b = std::get<dataio::LocalPosition>(s.views[v].record.position);
        EXPECT_GT(b.x_m, a.x_m);
        EXPECT_EQ(b.y_m, a.y_m);
    }
}

}  // namespace
}  // namespace underloc::synth

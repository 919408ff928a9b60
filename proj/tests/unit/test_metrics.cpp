#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "test_support.hpp"
#include "underloc/evaluation/metrics.hpp"

namespace underloc::evaluation {
namespace {

GroundTruthMatrix gt_from(std::size_t rows, std::size_t cols,
                          std::initializer_list<std::pair<std::size_t, std::size_t>> positives) {
    GroundTruthMatrix gt(rows, cols, 1.0);
    for (const auto& [db, q] : positives) gt.set(db, q, true);
    return gt;
}

GroundTruthMatrix random_gt(std::size_t rows, std::size_t cols, double p, Rng& rng) {
    GroundTruthMatrix gt(rows, cols, 1.0);
    for (std::size_t j = 0; j < rows; ++j) {
        for (std::size_t i = 0; i < cols; ++i) gt.set(j, i, rng.uniform01() < p);
    }
    return gt;
}

std::vector<std::size_t> random_ranking(std::size_t n, Rng& rng) {
    std::vector<std::size_t> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(r[i - 1], r[rng.uniform_index(i)]);
    return r;
}

TEST(Recall, AllRankOneHits) {
    const auto gt = gt_from(3, 2, {{2, 0}, {0, 1}});
    const std::vector<std::vector<std::size_t>> rankings{{2, 0, 1}, {0, 1, 2}};
    EXPECT_DOUBLE_EQ(recall_at_k(rankings, gt, 3).at(1), 1.0);
}

TEST(Recall, EnumeratedHits) {
    // Query 0 hits at rank 2, query 1 at rank 4.
    const auto gt = gt_from(5, 2, {{3, 0}, {4, 1}});
    const std::vector<std::vector<std::size_t>> rankings{{0, 3, 1, 2, 4}, {0, 1, 2, 4, 3}};
    const auto c = recall_at_k(rankings, gt, 4);
    EXPECT_EQ(c.values, (std::vector<double>{0.0, 0.5, 0.5, 1.0}));
    EXPECT_EQ(c.queries_with_positives, 2u);
}

TEST(Recall, ExhaustiveDepthIsOne) {
    Rng rng(1);
    GroundTruthMatrix gt(20, 8, 1.0);
    for (std::size_t i = 0; i < 8; ++i) gt.set(rng.uniform_index(20), i, true);
    std::vector<std::vector<std::size_t>> rankings;
    for (int i = 0; i < 8; ++i) rankings.push_back(random_ranking(20, rng));
    EXPECT_DOUBLE_EQ(recall_at_k(rankings, gt, 20).at(20), 1.0);
}

TEST(Recall, QueriesWithoutPositivesExcluded) {
    const auto gt = gt_from(3, 3, {{0, 0}});
    const std::vector<std::vector<std::size_t>> rankings{{0, 1, 2}, {0, 1, 2}, {0, 1, 2}};
    const auto c = recall_at_k(rankings, gt, 2);
    EXPECT_EQ(c.queries_with_positives, 1u);
    EXPECT_DOUBLE_EQ(c.at(1), 1.0);
}

TEST(Recall, MonotoneAndBounded) {
    Rng rng(2);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t rows = 1 + rng.uniform_index(30);
        const std::size_t cols = 1 + rng.uniform_index(10);
        const auto gt = random_gt(rows, cols, rng.uniform(0.0, 0.3), rng);
        std::vector<std::vector<std::size_t>> rankings;
        for (std::size_t i = 0; i < cols; ++i) rankings.push_back(random_ranking(rows, rng));
        const auto c = recall_at_k(rankings, gt, rows);
        for (std::size_t k = 1; k <= c.k_max(); ++k) {
            ASSERT_GE(c.at(k), 0.0);
            ASSERT_LE(c.at(k), 1.0);
            if (k > 1) {
                ASSERT_GE(c.at(k), c.at(k - 1));
            }
        }
    }
}

/// Direct restatement of the sweep for cross-checking.
PRCurve oracle_pr(const std::vector<std::optional<ScoredMatch>>& best, const GroundTruthMatrix& gt) {
    PRCurve c;
    std::size_t qpos = 0;
    std::set<double, std::greater<>> thresholds;
    for (std::size_t i = 0; i < best.size(); ++i) {
        if (!gt.has_positive(i)) continue;
        ++qpos;
        if (best[i]) thresholds.insert(best[i]->score);
    }
    if (qpos == 0) {
        c.undefined = true;
        return c;
    }
    for (double t : thresholds) {
        std::size_t tp = 0;
        std::size_t fp = 0;
        for (std::size_t i = 0; i < best.size(); ++i) {
            if (!gt.has_positive(i) || !best[i] || best[i]->score < t) continue;
            (gt.at(best[i]->database_index, i) ? tp : fp) += 1;
        }
        c.points.push_back({t, static_cast<double>(tp) / (tp + fp), static_cast<double>(tp) / qpos});
    }
    return c;
}

TEST(PrCurve, TwoPointSweep) {
    const auto gt = gt_from(2, 2, {{0, 0}, {0, 1}});
    const std::vector<std::optional<ScoredMatch>> best{ScoredMatch{0, 9.0}, ScoredMatch{1, 5.0}};
    const auto c = pr_curve(best, gt);
    ASSERT_EQ(c.points.size(), 2u);
    EXPECT_EQ(c.points[0].threshold, 9.0);
    EXPECT_DOUBLE_EQ(c.points[0].precision, 1.0);
    EXPECT_DOUBLE_EQ(c.points[0].recall, 0.5);
    EXPECT_EQ(c.points[1].threshold, 5.0);
    EXPECT_DOUBLE_EQ(c.points[1].precision, 0.5);
    EXPECT_DOUBLE_EQ(c.points[1].recall, 0.5);
}

TEST(PrCurve, AllCorrect) {
    const auto gt = gt_from(3, 3, {{0, 0}, {1, 1}, {2, 2}});
    const std::vector<std::optional<ScoredMatch>> best{ScoredMatch{0, 3}, ScoredMatch{1, 1},
                                                       ScoredMatch{2, 2}};
    for (const auto& p : pr_curve(best, gt).points) EXPECT_DOUBLE_EQ(p.precision, 1.0);
}

TEST(PrCurve, NoPositivesIsUndefined) {
    const GroundTruthMatrix gt(2, 2, 1.0);
    const std::vector<std::optional<ScoredMatch>> best{ScoredMatch{0, 3}, ScoredMatch{1, 1}};
    const auto c = pr_curve(best, gt);
    EXPECT_TRUE(c.undefined);
    EXPECT_TRUE(c.points.empty());
}

TEST(PrCurve, MatchesOracleAndInvariants) {
    Rng rng(3);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t rows = 1 + rng.uniform_index(10);
        const std::size_t cols = 1 + rng.uniform_index(15);
        const auto gt = random_gt(rows, cols, rng.uniform(0.0, 0.5), rng);
        std::vector<std::optional<ScoredMatch>> best(cols);
        for (auto& b : best) {
            if (rng.uniform01() < 0.9) {
                b = ScoredMatch{rng.uniform_index(rows), static_cast<double>(rng.uniform_index(6))};
            }
        }
        const auto c = pr_curve(best, gt);
        const auto o = oracle_pr(best, gt);
        ASSERT_EQ(c.undefined, o.undefined);
        ASSERT_EQ(c.points.size(), o.points.size());
        for (std::size_t p = 0; p < c.points.size(); ++p) {
            EXPECT_EQ(c.points[p].threshold, o.points[p].threshold);
            EXPECT_DOUBLE_EQ(c.points[p].precision, o.points[p].precision);
            EXPECT_DOUBLE_EQ(c.points[p].recall, o.points[p].recall);
            EXPECT_GE(c.points[p].precision, 0.0);
            EXPECT_LE(c.points[p].precision, 1.0);
            EXPECT_GE(c.points[p].recall, 0.0);
            EXPECT_LE(c.points[p].recall, 1.0);
            if (p > 0) {
                EXPECT_GE(c.points[p].recall, c.points[p - 1].recall);
            }
        }
        if (!c.points.empty()) {
            // Loosest threshold: every best match of a query with positives
            // is predicted.
            std::size_t correct = 0;
            std::size_t predicted = 0;
            for (std::size_t i = 0; i < cols; ++i) {
                if (!gt.has_positive(i) || !best[i]) continue;
                ++predicted;
                correct += gt.at(best[i]->database_index, i);
            }
            EXPECT_DOUBLE_EQ(c.points.back().precision, static_cast<double>(correct) / predicted);
        }
    }
}

}  // namespace
}  // namespace underloc::evaluation

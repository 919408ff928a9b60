#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "underloc/evaluation/ground_truth.hpp"

namespace underloc::evaluation {

/// values[K - 1] = Recall@K for K = 1..K_max.
struct RecallCurve {
    std::vector<double> values;
    std::size_t queries_with_positives = 0;

    [[nodiscard]] double at(std::size_t k) const { return values.at(k - 1); }
    [[nodiscard]] std::size_t k_max() const { return values.size(); }
};

/// Fraction of queries with at least one positive whose first K ranked
/// database indices contain a positive. Queries without positives are left
/// out of the denominator; a ranking shorter than K counts in full.
RecallCurve recall_at_k(std::span<const std::vector<std::size_t>> rankings,
                        const GroundTruthMatrix& gt, std::size_t k_max);

struct ScoredMatch {
    std::size_t database_index = 0;
    double score = 0.0;
};

struct PRPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

/// Best-single-match precision/recall, loosest threshold last.
struct PRCurve {
    std::vector<PRPoint> points;
    /// Set when no query has a positive, so recall is undefined.
    bool undefined = false;
};

/// Sweeps the distinct scores in descending order; at each threshold the
/// predictions are the best matches scoring at or above it. Only queries
/// with at least one positive are scored; recall is TP / |Q+|. Queries
/// without a best match never predict.
PRCurve pr_curve(std::span<const std::optional<ScoredMatch>> best_matches,
                 const GroundTruthMatrix& gt);

}  // namespace underloc::evaluation

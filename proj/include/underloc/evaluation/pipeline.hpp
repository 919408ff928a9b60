#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "underloc/dataio/types.hpp"
#include "underloc/evaluation/baselines.hpp"
#include "underloc/evaluation/ground_truth.hpp"
#include "underloc/evaluation/metrics.hpp"
#include "underloc/geometry/registration.hpp"
#include "underloc/maskops/maskops.hpp"
#include "underloc/matching/correspondence.hpp"
#include "underloc/matching/matcher.hpp"
#include "underloc/matching/rerank.hpp"

namespace underloc::evaluation {

inline constexpr std::size_t kDefaultTopK = 10;
inline constexpr std::size_t kDefaultRecallDepth = 25;

struct PipelineOptions {
    std::size_t k = kDefaultTopK;
    double chi_px = geometry::kDefaultChiPx;
    /// Largest K reported in the recall curves (clipped to |D|).
    std::size_t recall_k_max = kDefaultRecallDepth;
    std::uint64_t seed = 42;
    /// Allow a query to retrieve the database image with the same image_id.
    bool self_match = false;
    bool distance_3d = false;
    bool inlier_only_error = false;
    bool compute_iou = true;
    bool keep_overlays = false;
    unsigned threads = 0;
    std::size_t max_dense_entries = std::size_t{1} << 28;
    matching::MatcherOptions matcher;
    geometry::RansacOptions ransac;
};

/// Externally produced correspondences keyed by (query id, database id).
using CorrespondenceLookup =
    std::map<std::pair<std::string, std::string>, matching::CorrespondenceSet>;

CorrespondenceLookup make_lookup(std::vector<matching::CorrespondenceSet> sets);

struct QueryOutcome {
    std::size_t query_index = 0;
    /// Top-K candidates after reranking, best first.
    std::vector<matching::RerankedMatch> reranked;
    std::optional<matching::RerankedMatch> best;
    std::optional<geometry::RegistrationResult> registration;
    std::optional<double> iou;
    std::optional<maskops::WarpedOverlay> overlay;
    /// Set when the query could not be processed; the run continues.
    std::optional<std::string> failure;
};

struct PipelineResult {
    std::vector<QueryOutcome> queries;
    GroundTruthMatrix ground_truth;
    /// Global ranking only.
    std::vector<std::vector<std::size_t>> retrieval_rankings;
    /// Reranked top-K followed by the rest of the global ranking.
    std::vector<std::vector<std::size_t>> hierarchical_rankings;
    RecallCurve retrieval_recall;
    RecallCurve hierarchical_recall;
    /// Score = negative L2 distance of the global top-1.
    PRCurve retrieval_pr;
    /// Score = inlier count of the reranked best match.
    PRCurve hierarchical_pr;
    /// As hierarchical_pr, predicting only chi-accepted registrations.
    PRCurve registered_pr;
    CostCounters counters;
};

/// Retrieval, top-K, local matching, rerank, homography, chi filter and
/// (when masks are present) warped-mask IoU for every query.
///
/// Both manifests need descriptors; keypoints are needed unless `external`
/// supplies the correspondences. Throws DimensionMismatch or
/// std::invalid_argument for stage-level configuration errors; per-query
/// failures are recorded in the outcome.
PipelineResult run_pipeline(const dataio::DatasetManifest& queries,
                            const dataio::DatasetManifest& database,
                            const PipelineOptions& options,
                            const CorrespondenceLookup* external = nullptr);

}  // namespace underloc::evaluation

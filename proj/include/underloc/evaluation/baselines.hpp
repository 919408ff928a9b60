#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "underloc/dataio/types.hpp"
#include "underloc/evaluation/ground_truth.hpp"
#include "underloc/evaluation/metrics.hpp"
#include "underloc/matching/matcher.hpp"

namespace underloc::evaluation {

/// Work done by a run. Invocation counts are deterministic; wall times
/// are not and are reported separately from the metrics.
struct CostCounters {
    std::uint64_t global_descriptor_comparisons = 0;
    std::uint64_t local_match_invocations = 0;
    std::map<std::string, double> stage_seconds;
};

inline constexpr std::size_t kDefaultRandomTrials = 100;

/// Monte Carlo random guesser. For every query with a positive and each of
/// `trials` trials, a uniformly random ordering of the database is drawn;
/// its first K entries are the K distinct guesses. Recall@K is the number
/// of (query, trial) events with a hit in the first K over |Q+| * trials.
RecallCurve random_baseline(const GroundTruthMatrix& gt, std::size_t k_max, std::size_t trials,
                            std::uint64_t seed);

struct BruteForceOptions {
    matching::MatcherOptions matcher;
    unsigned threads = 0;
    /// Skip database entries whose image_id equals the query's.
    bool exclude_same_id = false;
};

struct BruteForceResult {
    /// Per query: database indices by inlier count descending, ties by index.
    std::vector<std::vector<std::size_t>> rankings;
    /// Per query: inlier count for every database index (0 for skipped).
    std::vector<std::vector<std::size_t>> inlier_counts;
    CostCounters counters;
};

/// Local matching on every query/database pair.
BruteForceResult brute_force_baseline(std::span<const dataio::KeypointSet> queries,
                                      std::span<const dataio::KeypointSet> database,
                                      const BruteForceOptions& options = {});

}  // namespace underloc::evaluation

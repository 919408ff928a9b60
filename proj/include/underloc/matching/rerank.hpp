#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "underloc/retrieval/retrieval.hpp"

namespace underloc::matching {

struct RerankedMatch {
    std::size_t query_index = 0;
    std::size_t database_index = 0;
    std::size_t inlier_count = 0;
    double global_distance = 0.0;

    friend bool operator==(const RerankedMatch&, const RerankedMatch&) = default;
};

/// Orders the candidates by inlier count (descending), then global
/// distance, then database index. `inlier_counts[k]` belongs to
/// `candidates.entries[k]`.
std::vector<RerankedMatch> rerank_all(const retrieval::CandidateSet& candidates,
                                      std::span<const std::size_t> inlier_counts);

/// Best candidate under rerank_all's order. The candidate set must be
/// non-empty; a query whose counts are all zero still gets a match.
RerankedMatch rerank(const retrieval::CandidateSet& candidates,
                     std::span<const std::size_t> inlier_counts);

}  // namespace underloc::matching

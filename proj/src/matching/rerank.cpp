#include "underloc/matching/rerank.hpp"

#include <algorithm>
#include <stdexcept>

namespace underloc::matching {

std::vector<RerankedMatch> rerank_all(const retrieval::CandidateSet& candidates,
                                      std::span<const std::size_t> inlier_counts) {
    if (inlier_counts.size() != candidates.entries.size()) {
        throw std::invalid_argument("rerank: one inlier count per candidate required");
    }
    std::vector<RerankedMatch> out;
    out.reserve(inlier_counts.size());
    for (std::size_t k = 0; k < inlier_counts.size(); ++k) {
        const auto& c = candidates.entries[k];
        out.push_back({candidates.query_index, c.database_index, inlier_counts[k], c.distance});
    }
    std::sort(out.begin(), out.end(), [](const RerankedMatch& a, const RerankedMatch& b) {
        if (a.inlier_count != b.inlier_count) return a.inlier_count > b.inlier_count;
        if (a.global_distance != b.global_distance) return a.global_distance < b.global_distance;
        return a.database_index < b.database_index;
    });
    return out;
}

RerankedMatch rerank(const retrieval::CandidateSet& candidates,
                     std::span<const std::size_t> inlier_counts) {
    if (candidates.entries.empty()) throw std::invalid_argument("rerank: empty candidate set");
    return rerank_all(candidates, inlier_counts).front();
}

}  // namespace underloc::matching

#include "underloc/evaluation/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include "underloc/common/parallel.hpp"
#include "underloc/common/random.hpp"

namespace underloc::evaluation {

RecallCurve random_baseline(const GroundTruthMatrix& gt, std::size_t k_max, std::size_t trials,
                            std::uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("random baseline needs at least one trial");
    RecallCurve curve;
    curve.values.assign(k_max, 0.0);
    const std::size_t db_size = gt.rows();
    const std::size_t depth = std::min(k_max, db_size);

    std::vector<std::uint64_t> first_hit(k_max, 0);
    std::vector<std::size_t> order(db_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> picks;
    picks.reserve(depth);
    for (std::size_t i = 0; i < gt.cols(); ++i) {
        if (!gt.has_positive(i)) continue;
        ++curve.queries_with_positives;
        Rng rng(derive_seed(seed, "random-baseline", std::to_string(i)));
        for (std::size_t t = 0; t < trials; ++t) {
            // Partial Fisher-Yates: order[0..depth) is a uniform draw of
            // `depth` distinct indices in uniform order.
            picks.clear();
            for (std::size_t r = 0; r < depth; ++r) {
                const std::size_t pick = r + static_cast<std::size_t>(rng.uniform_index(db_size - r));
                std::swap(order[r], order[pick]);
                picks.push_back(pick);
                if (gt.at(order[r], i)) {
                    ++first_hit[r];
                    break;
                }
            }
            // Undo the swaps so every trial starts from the identity.
            for (std::size_t r = picks.size(); r-- > 0;) std::swap(order[r], order[picks[r]]);
        }
    }
    if (curve.queries_with_positives == 0) return curve;
    const double events = static_cast<double>(curve.queries_with_positives) *
                          static_cast<double>(trials);
    std::uint64_t cumulative = 0;
    for (std::size_t k = 0; k < k_max; ++k) {
        cumulative += first_hit[k];
        curve.values[k] = static_cast<double>(cumulative) / events;
    }
    return curve;
}

BruteForceResult brute_force_baseline(std::span<const dataio::KeypointSet> queries,
                                      std::span<const dataio::KeypointSet> database,
                                      const BruteForceOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    BruteForceResult result;
    result.rankings.resize(queries.size());
    result.inlier_counts.resize(queries.size());
    std::atomic<std::uint64_t> invocations{0};

    parallel_for(queries.size(), options.threads, [&](std::size_t i) {
        auto& counts = result.inlier_counts[i];
        counts.assign(database.size(), 0);
        std::vector<std::size_t> ranking;
        ranking.reserve(database.size());
        for (std::size_t j = 0; j < database.size(); ++j) {
            if (options.exclude_same_id && database[j].image_id == queries[i].image_id) continue;
            counts[j] = matching::match_keypoints(queries[i], database[j], options.matcher).size();
            invocations.fetch_add(1, std::memory_order_relaxed);
            ranking.push_back(j);
        }
        std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
            return counts[a] > counts[b];
        });
        result.rankings[i] = std::move(ranking);
    });

    result.counters.local_match_invocations = invocations.load();
    result.counters.stage_seconds["bruteforce_matching"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace underloc::evaluation

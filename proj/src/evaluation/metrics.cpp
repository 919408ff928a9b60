#include "underloc/evaluation/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace underloc::evaluation {

RecallCurve recall_at_k(std::span<const std::vector<std::size_t>> rankings,
                        const GroundTruthMatrix& gt, std::size_t k_max) {
    if (rankings.size() != gt.cols()) {
        throw std::invalid_argument("recall_at_k: one ranking per query required");
    }
    RecallCurve curve;
    curve.values.assign(k_max, 0.0);
    // hits_at[r] = number of queries whose first positive is at rank r + 1.
    std::vector<std::size_t> hits_at(k_max, 0);
    for (std::size_t i = 0; i < rankings.size(); ++i) {
        if (!gt.has_positive(i)) continue;
        ++curve.queries_with_positives;
        const auto& r = rankings[i];
        const std::size_t depth = std::min(k_max, r.size());
        for (std::size_t rank = 0; rank < depth; ++rank) {
            if (gt.at(r[rank], i)) {
                ++hits_at[rank];
                break;
            }
        }
    }
    if (curve.queries_with_positives == 0) return curve;
    std::size_t cumulative = 0;
    for (std::size_t k = 0; k < k_max; ++k) {
        cumulative += hits_at[k];
        curve.values[k] =
            static_cast<double>(cumulative) / static_cast<double>(curve.queries_with_positives);
    }
    return curve;
}

PRCurve pr_curve(std::span<const std::optional<ScoredMatch>> best_matches,
                 const GroundTruthMatrix& gt) {
    if (best_matches.size() != gt.cols()) {
        throw std::invalid_argument("pr_curve: one entry per query required");
    }
    PRCurve curve;
    const std::size_t positives = gt.queries_with_positives();
    if (positives == 0) {
        curve.undefined = true;
        return curve;
    }

    struct Scored {
        double score;
        bool correct;
    };
    std::vector<Scored> preds;
    for (std::size_t i = 0; i < best_matches.size(); ++i) {
        if (!best_matches[i] || !gt.has_positive(i)) continue;
        preds.push_back({best_matches[i]->score, gt.at(best_matches[i]->database_index, i)});
    }
    std::sort(preds.begin(), preds.end(),
              [](const Scored& a, const Scored& b) { return a.score > b.score; });

    std::size_t tp = 0;
    std::size_t predicted = 0;
    for (std::size_t k = 0; k < preds.size();) {
        const double threshold = preds[k].score;
        while (k < preds.size() && preds[k].score == threshold) {
            tp += preds[k].correct ? 1 : 0;
            ++predicted;
            ++k;
        }
        curve.points.push_back({threshold, static_cast<double>(tp) / static_cast<double>(predicted),
                                static_cast<double>(tp) / static_cast<double>(positives)});
    }
    return curve;
}

}  // namespace underloc::evaluation

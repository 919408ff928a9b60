#include "underloc/evaluation/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <stdexcept>

#include "underloc/common/errors.hpp"
#include "underloc/common/parallel.hpp"
#include "underloc/common/random.hpp"
#include "underloc/dataio/image.hpp"
#include "underloc/retrieval/retrieval.hpp"

namespace underloc::evaluation {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_inputs(const dataio::DatasetManifest& queries, const dataio::DatasetManifest& database,
                    const PipelineOptions& options, const CorrespondenceLookup* external) {
    if (options.k < 1) throw std::invalid_argument("K must be >= 1");
    if (!(options.chi_px > 0.0)) throw std::invalid_argument("chi must be > 0");
    if (!queries.descriptors || !database.descriptors) {
        throw std::invalid_argument("both datasets need global descriptors");
    }
    if (queries.descriptors->dimension != database.descriptors->dimension) {
        throw DimensionMismatch("global descriptor dimension differs: query d=" +
                                std::to_string(queries.descriptors->dimension) + ", database d=" +
                                std::to_string(database.descriptors->dimension));
    }
    if (!external && (!queries.keypoints || !database.keypoints)) {
        throw std::invalid_argument("both datasets need keypoints unless correspondences are "
                                    "supplied");
    }
    if (queries.convention != database.convention) {
        throw ConsistencyError("query and database manifests declare different coordinate "
                               "conventions");
    }
    if (queries.localization_radius_m != database.localization_radius_m) {
        throw std::invalid_argument("query and database manifests declare different "
                                    "localization radii");
    }
}

std::optional<dataio::BinaryMask> load_record_mask(const dataio::DatasetManifest& m,
                                                   std::size_t index) {
    const auto& rec = m.records[index];
    if (!rec.mask_path) return std::nullopt;
    return dataio::load_mask(m.resolve(*rec.mask_path), rec.width_px, rec.height_px);
}

}  // namespace

CorrespondenceLookup make_lookup(std::vector<matching::CorrespondenceSet> sets) {
    CorrespondenceLookup lookup;
    for (auto& s : sets) {
        auto key = std::pair{s.query_image_id, s.database_image_id};
        lookup.insert_or_assign(std::move(key), std::move(s));
    }
    return lookup;
}

PipelineResult run_pipeline(const dataio::DatasetManifest& queries,
                            const dataio::DatasetManifest& database,
                            const PipelineOptions& options, const CorrespondenceLookup* external) {
    require_inputs(queries, database, options, external);
    PipelineResult result;
    const std::size_t nq = queries.size();
    const std::size_t nd = database.size();

    result.ground_truth =
        build_ground_truth(queries.positions(), database.positions(),
                           database.localization_radius_m, {options.distance_3d});

    auto t0 = Clock::now();
    std::optional<retrieval::SimilarityMatrix> dense;
    if (nq == 0 || nd <= options.max_dense_entries / nq) {
        dense = retrieval::compute_similarity(*queries.descriptors, *database.descriptors,
                                              {options.threads, options.max_dense_entries});
    }
    result.counters.global_descriptor_comparisons = static_cast<std::uint64_t>(nq) * nd;
    result.counters.stage_seconds["global_retrieval"] = seconds_since(t0);

    t0 = Clock::now();
    result.queries.resize(nq);
    result.retrieval_rankings.resize(nq);
    result.hierarchical_rankings.resize(nq);
    std::atomic<std::uint64_t> invocations{0};

    parallel_for(nq, options.threads, [&](std::size_t i) {
        QueryOutcome& out = result.queries[i];
        out.query_index = i;
        const auto& qrec = queries.records[i];
        try {
            const std::vector<float> column =
                dense ? dense->column(i)
                      : retrieval::query_column(*queries.descriptors, *database.descriptors, i);
            std::vector<std::size_t> excluded;
            if (!options.self_match) {
                if (const auto same = database.index_of(qrec.image_id)) excluded.push_back(*same);
            }
            const auto ranked = retrieval::top_k(column, i, nd, excluded);
            auto& global = result.retrieval_rankings[i];
            for (const auto& c : ranked.entries) global.push_back(c.database_index);
            if (ranked.entries.empty()) {
                out.failure = "no database candidates";
                return;
            }

            retrieval::CandidateSet candidates{i, {}};
            const std::size_t k = std::min(options.k, ranked.entries.size());
            candidates.entries.assign(ranked.entries.begin(),
                                      ranked.entries.begin() + static_cast<std::ptrdiff_t>(k));

            std::vector<matching::CorrespondenceSet> corr(k);
            std::vector<std::size_t> counts(k);
            for (std::size_t c = 0; c < k; ++c) {
                const std::size_t j = candidates.entries[c].database_index;
                const auto& drec = database.records[j];
                if (external) {
                    const auto it = external->find({qrec.image_id, drec.image_id});
                    if (it != external->end()) {
                        corr[c] = it->second;
                    } else {
                        corr[c].query_image_id = qrec.image_id;
                        corr[c].database_image_id = drec.image_id;
                    }
                } else {
                    corr[c] = matching::match_keypoints((*queries.keypoints)[i],
                                                        (*database.keypoints)[j], options.matcher);
                }
                invocations.fetch_add(1, std::memory_order_relaxed);
                counts[c] = corr[c].size();
            }

            out.reranked = matching::rerank_all(candidates, counts);
            out.best = out.reranked.front();
            auto& hier = result.hierarchical_rankings[i];
            for (const auto& m : out.reranked) hier.push_back(m.database_index);
            hier.insert(hier.end(), global.begin() + static_cast<std::ptrdiff_t>(k), global.end());

            std::size_t best_slot = 0;
            while (candidates.entries[best_slot].database_index != out.best->database_index) {
                ++best_slot;
            }
            const auto& best_corr = corr[best_slot];
            const auto& drec = database.records[out.best->database_index];

            geometry::RegistrationOptions reg;
            reg.ransac = options.ransac;
            reg.ransac.seed = derive_seed(options.seed, qrec.image_id, drec.image_id);
            reg.chi_px = options.chi_px;
            reg.inlier_only_error = options.inlier_only_error;
            out.registration = geometry::register_pair(best_corr, reg);

            if (options.compute_iou &&
                out.registration->status == geometry::RegistrationStatus::accepted) {
                const auto qmask = load_record_mask(queries, i);
                const auto dmask = load_record_mask(database, out.best->database_index);
                if (qmask && dmask) {
                    auto overlay = maskops::make_overlay(*dmask, *qmask, *out.registration->homography);
                    out.iou = overlay.iou;
                    if (options.keep_overlays) out.overlay = std::move(overlay);
                }
            }
        } catch (const std::exception& e) {
            out.failure = e.what();
        }
    });
    result.counters.local_match_invocations = invocations.load();
    result.counters.stage_seconds["local_refinement"] = seconds_since(t0);

    t0 = Clock::now();
    const std::size_t k_max = std::min(options.recall_k_max, nd);
    result.retrieval_recall = recall_at_k(result.retrieval_rankings, result.ground_truth, k_max);
    result.hierarchical_recall =
        recall_at_k(result.hierarchical_rankings, result.ground_truth, k_max);

    std::vector<std::optional<ScoredMatch>> retrieval_best(nq);
    std::vector<std::optional<ScoredMatch>> hierarchical_best(nq);
    std::vector<std::optional<ScoredMatch>> registered_best(nq);
    for (std::size_t i = 0; i < nq; ++i) {
        const auto& q = result.queries[i];
        if (!result.retrieval_rankings[i].empty()) {
            const auto top = result.retrieval_rankings[i].front();
            const float d = dense ? dense->at(top, i)
                                  : retrieval::query_column(*queries.descriptors,
                                                            *database.descriptors, i)[top];
            retrieval_best[i] = ScoredMatch{top, -static_cast<double>(d)};
        }
        if (!q.best) continue;
        hierarchical_best[i] =
            ScoredMatch{q.best->database_index, static_cast<double>(q.best->inlier_count)};
        if (q.registration && q.registration->status == geometry::RegistrationStatus::accepted) {
            registered_best[i] = hierarchical_best[i];
        }
    }
    result.retrieval_pr = pr_curve(retrieval_best, result.ground_truth);
    result.hierarchical_pr = pr_curve(hierarchical_best, result.ground_truth);
    result.registered_pr = pr_curve(registered_best, result.ground_truth);
    result.counters.stage_seconds["metrics"] = seconds_since(t0);
    return result;
}

}  // namespace underloc::evaluation

#include "underloc/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "underloc/common/errors.hpp"
#include "underloc/dataio/formats.hpp"
#include "underloc/dataio/image.hpp"
#include "underloc/dataio/manifest.hpp"
#include "underloc/evaluation/baselines.hpp"
#include "underloc/evaluation/ground_truth.hpp"
#include "underloc/evaluation/metrics.hpp"
#include "underloc/evaluation/pipeline.hpp"
#include "underloc/geometry/registration.hpp"
#include "underloc/maskops/maskops.hpp"
#include "underloc/matching/correspondence.hpp"
#include "underloc/matching/features.hpp"
#include "underloc/synth/survey.hpp"

namespace underloc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// A user-facing configuration or input problem; maps to exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot write " + path.string());
    f << text;
    if (!f) throw UsageError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <typename T>
T field(const json& j, const char* name, T fallback) {
    if (!j.contains(name) || j.at(name).is_null()) return fallback;
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config field '" + std::string(name) + "' has the wrong type");
    }
}

matching::FeatureOptions feature_options(const RunConfig& c) {
    matching::FeatureOptions f;
    f.max_keypoints = c.max_keypoints;
    f.patch_size = c.patch_size;
    return f;
}

dataio::DatasetManifest load_side(const fs::path& path, const char* flag, bool features,
                                  bool check_masks) {
    if (path.empty()) throw UsageError(std::string("missing required option ") + flag);
    if (!fs::exists(path)) {
        throw UsageError(std::string(flag) + ": manifest not found: " + path.string());
    }
    try {
        dataio::ManifestLoadOptions opts;
        opts.load_features = features;
        opts.check_masks = check_masks;
        return dataio::load_manifest(path, opts);
    } catch (const std::exception& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
}

/// Loads both sides; with builtin features the descriptor/keypoint files
/// are ignored and everything is computed from the images.
std::pair<dataio::DatasetManifest, dataio::DatasetManifest> load_sides(const RunConfig& c,
                                                                       bool need_features,
                                                                       bool check_masks) {
    const bool from_files = need_features && !c.use_builtin_features;
    auto q = load_side(c.query, "--query", from_files, check_masks);
    auto d = load_side(c.database, "--database", from_files, check_masks);
    if (need_features && c.use_builtin_features) {
        for (auto* m : {&q, &d}) {
            try {
                matching::extract_dataset_features(*m, feature_options(c), c.threads);
            } catch (const std::exception& e) {
                throw UsageError(m->name + ": feature extraction failed: " + e.what());
            }
        }
    }
    return {std::move(q), std::move(d)};
}

json curve_json(const evaluation::PRCurve& c) {
    json points = json::array();
    for (const auto& p : c.points) points.push_back({p.threshold, p.precision, p.recall});
    return {{"undefined", c.undefined}, {"points", points}};
}

void append_recall(std::string& csv, const std::string& series, const evaluation::RecallCurve& c) {
    for (std::size_t k = 1; k <= c.k_max(); ++k) {
        csv += series + "," + std::to_string(k) + "," + fmt(c.at(k)) + "\n";
    }
}

void append_pr(std::string& csv, const std::string& series, const evaluation::PRCurve& c) {
    for (const auto& p : c.points) {
        csv += series + "," + fmt(p.threshold) + "," + fmt(p.precision) + "," + fmt(p.recall) + "\n";
    }
}

struct Baselines {
    std::optional<evaluation::RecallCurve> random;
    std::optional<evaluation::BruteForceResult> bruteforce;
    std::optional<evaluation::RecallCurve> bruteforce_recall;
    std::optional<evaluation::PRCurve> bruteforce_pr;
};

Baselines run_baselines(const RunConfig& c, const dataio::DatasetManifest& q,
                        const dataio::DatasetManifest& d, const evaluation::GroundTruthMatrix& gt,
                        std::size_t k_max) {
    Baselines b;
    for (const auto& kind : c.baselines) {
        if (kind == "random") {
            b.random = evaluation::random_baseline(gt, k_max, c.trials, c.seed);
        } else if (kind == "bruteforce") {
            if (!q.keypoints || !d.keypoints) {
                throw UsageError("--baseline bruteforce needs keypoints on both sides "
                                 "(keypoint_file or --use-builtin-features)");
            }
            evaluation::BruteForceOptions opts;
            opts.matcher.ratio = c.ratio;
            opts.threads = c.threads;
            opts.exclude_same_id = !c.self_match;
            auto result = evaluation::brute_force_baseline(*q.keypoints, *d.keypoints, opts);
            std::vector<std::optional<evaluation::ScoredMatch>> best(q.size());
            for (std::size_t i = 0; i < q.size(); ++i) {
                if (result.rankings[i].empty()) continue;
                const std::size_t top = result.rankings[i].front();
                best[i] = evaluation::ScoredMatch{top,
                                                  static_cast<double>(result.inlier_counts[i][top])};
            }
            b.bruteforce_recall = evaluation::recall_at_k(result.rankings, gt, k_max);
            b.bruteforce_pr = evaluation::pr_curve(best, gt);
            b.bruteforce = std::move(result);
        } else {
            throw UsageError("--baseline: unknown kind '" + kind + "' (random|bruteforce)");
        }
    }
    return b;
}

void add_baseline_metrics(json& metrics, std::string& recall_csv, std::string& pr_csv,
                          const Baselines& b) {
    if (b.random) {
        metrics["recall"]["random"] = b.random->values;
        append_recall(recall_csv, "random", *b.random);
    }
    if (b.bruteforce) {
        metrics["recall"]["bruteforce"] = b.bruteforce_recall->values;
        metrics["pr"]["bruteforce"] = curve_json(*b.bruteforce_pr);
        metrics["counters"]["bruteforce_local_match_invocations"] =
            b.bruteforce->counters.local_match_invocations;
        append_recall(recall_csv, "bruteforce", *b.bruteforce_recall);
        append_pr(pr_csv, "bruteforce", *b.bruteforce_pr);
    }
}

std::string overlay_name(const std::string& qid, const std::string& did) {
    return qid + "__" + did + ".ppm";
}

// ---------------------------------------------------------------- run

int cmd_run(const RunConfig& c, std::ostream& out) {
    validate(c);
    const auto t0 = std::chrono::steady_clock::now();
    auto [q, d] = load_sides(c, true, true);

    std::optional<evaluation::CorrespondenceLookup> lookup;
    if (c.correspondences) {
        if (!fs::exists(*c.correspondences)) {
            throw UsageError("--correspondences: file not found: " + c.correspondences->string());
        }
        try {
            lookup = evaluation::make_lookup(matching::load_correspondences(*c.correspondences));
        } catch (const std::exception& e) {
            throw UsageError(c.correspondences->string() + ": " + e.what());
        }
    }

    evaluation::PipelineOptions opts;
    opts.k = c.k;
    opts.chi_px = c.chi_px;
    opts.recall_k_max = c.recall_k_max;
    opts.seed = c.seed;
    opts.self_match = c.self_match;
    opts.distance_3d = c.distance_3d;
    opts.inlier_only_error = c.inlier_only_error;
    opts.keep_overlays = true;
    opts.threads = c.threads;
    opts.matcher.ratio = c.ratio;
    opts.ransac.seed = c.seed;

    evaluation::PipelineResult result;
    try {
        result = evaluation::run_pipeline(q, d, opts, lookup ? &*lookup : nullptr);
    } catch (const std::logic_error& e) {
        throw UsageError(e.what());
    } catch (const ConsistencyError& e) {
        throw UsageError(e.what());
    }
    const std::size_t k_max = result.retrieval_recall.k_max();
    const Baselines baselines = run_baselines(c, q, d, result.ground_truth, k_max);

    fs::create_directories(c.out);
    fs::create_directories(c.out / "overlays");

    std::string registrations;
    std::size_t accepted = 0;
    std::size_t failures = 0;
    double error_sum = 0.0;
    double iou_sum = 0.0;
    std::size_t iou_count = 0;
    for (const auto& o : result.queries) {
        json line;
        if (o.registration) {
            line = geometry::to_json(*o.registration);
            line["iou"] = o.iou ? json(*o.iou) : json(nullptr);
            if (o.registration->status == geometry::RegistrationStatus::accepted) {
                ++accepted;
                error_sum += *o.registration->reprojection_error_px;
            }
        } else {
            line = {{"query_id", q.records[o.query_index].image_id}, {"database_id", nullptr},
                    {"status", "failed"}};
        }
        if (o.failure) {
            ++failures;
            line["error"] = *o.failure;
        }
        registrations += line.dump() + "\n";
        if (o.iou) {
            iou_sum += *o.iou;
            ++iou_count;
        }
        if (o.overlay && o.registration) {
            dataio::write_ppm(maskops::render_overlay(*o.overlay),
                              c.out / "overlays" /
                                  overlay_name(o.registration->query_image_id,
                                               o.registration->database_image_id));
        }
    }

    json metrics;
    metrics["config"] = config_echo(c);
    metrics["dataset"] = {{"queries", q.size()},
                          {"database", d.size()},
                          {"queries_with_positives", result.ground_truth.queries_with_positives()},
                          {"localization_radius_m", d.localization_radius_m}};
    metrics["recall"] = {{"retrieval", result.retrieval_recall.values},
                         {"hierarchical", result.hierarchical_recall.values}};
    metrics["pr"] = {{"retrieval", curve_json(result.retrieval_pr)},
                     {"hierarchical", curve_json(result.hierarchical_pr)},
                     {"registered", curve_json(result.registered_pr)}};
    metrics["registration"] = {
        {"queries", result.queries.size()},
        {"accepted", accepted},
        {"failures", failures},
        {"mean_error_px_accepted", accepted ? json(error_sum / accepted) : json(nullptr)},
        {"mean_iou", iou_count ? json(iou_sum / iou_count) : json(nullptr)},
        {"iou_pairs", iou_count}};
    metrics["counters"] = {
        {"global_descriptor_comparisons", result.counters.global_descriptor_comparisons},
        {"local_match_invocations", result.counters.local_match_invocations}};

    std::string recall_csv = "series,k,recall\n";
    append_recall(recall_csv, "retrieval", result.retrieval_recall);
    append_recall(recall_csv, "hierarchical", result.hierarchical_recall);
    std::string pr_csv = "series,threshold,precision,recall\n";
    append_pr(pr_csv, "retrieval", result.retrieval_pr);
    append_pr(pr_csv, "hierarchical", result.hierarchical_pr);
    append_pr(pr_csv, "registered", result.registered_pr);
    add_baseline_metrics(metrics, recall_csv, pr_csv, baselines);

    json timing = result.counters.stage_seconds;
    if (baselines.bruteforce) {
        for (const auto& [k, v] : baselines.bruteforce->counters.stage_seconds) timing[k] = v;
    }
    timing["total"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_json(c.out / "metrics.json", metrics);
    write_text(c.out / "recall.csv", recall_csv);
    write_text(c.out / "pr.csv", pr_csv);
    write_text(c.out / "registrations.jsonl", registrations);
    write_json(c.out / "timing.json", timing);
    json full = config_echo(c);
    full["threads"] = c.threads;
    full["out"] = c.out.string();
    write_json(c.out / "config.json", full);

    out << "queries " << q.size() << ", database " << d.size() << ", R@1 retrieval "
        << fmt(result.retrieval_recall.values.empty() ? 0.0 : result.retrieval_recall.at(1))
        << ", R@1 hierarchical "
        << fmt(result.hierarchical_recall.values.empty() ? 0.0 : result.hierarchical_recall.at(1))
        << ", accepted " << accepted << "/" << result.queries.size() << "\n"
        << "wrote " << c.out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- baseline

int cmd_baseline(RunConfig c, const std::string& kind, std::ostream& out) {
    validate(c);
    if (kind != "random" && kind != "bruteforce") {
        throw UsageError("--kind: expected random or bruteforce, got '" + kind + "'");
    }
    c.baselines = {kind};
    auto [q, d] = load_sides(c, kind == "bruteforce", false);
    if (q.convention != d.convention) {
        throw UsageError("query and database manifests use different coordinate conventions");
    }
    evaluation::GroundTruthOptions gt_opts;
    gt_opts.distance_3d = c.distance_3d;
    const auto qp = q.positions();
    const auto dp = d.positions();
    evaluation::GroundTruthMatrix gt;
    try {
        gt = evaluation::build_ground_truth(qp, dp, d.localization_radius_m, gt_opts);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    const std::size_t k_max = std::min(c.recall_k_max, d.size());
    const Baselines b = run_baselines(c, q, d, gt, k_max);

    json metrics;
    metrics["config"] = config_echo(c);
    metrics["dataset"] = {{"queries", q.size()},
                          {"database", d.size()},
                          {"queries_with_positives", gt.queries_with_positives()},
                          {"localization_radius_m", d.localization_radius_m}};
    metrics["recall"] = json::object();
    metrics["counters"] = json::object();
    std::string recall_csv = "series,k,recall\n";
    std::string pr_csv = "series,threshold,precision,recall\n";
    add_baseline_metrics(metrics, recall_csv, pr_csv, b);

    fs::create_directories(c.out);
    write_json(c.out / "metrics.json", metrics);
    write_text(c.out / "recall.csv", recall_csv);
    if (b.bruteforce) {
        write_text(c.out / "pr.csv", pr_csv);
        write_json(c.out / "timing.json", json(b.bruteforce->counters.stage_seconds));
    }
    out << kind << " baseline over " << q.size() << " queries written to " << c.out.string()
        << "\n";
    return 0;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    synth::SurveyOptions survey;
    std::string pattern = "lawnmower";
    bool no_features = false;
};

int cmd_synth(SynthArgs a, std::uint64_t seed, const RunConfig& c, std::ostream& out) {
    if (a.pattern == "lawnmower") {
        a.survey.pattern = synth::TrajectoryPattern::lawnmower;
    } else if (a.pattern == "transect") {
        a.survey.pattern = synth::TrajectoryPattern::transect;
    } else {
        throw UsageError("--pattern: expected lawnmower or transect, got '" + a.pattern + "'");
    }
    a.survey.seed = seed;
    synth::SyntheticSurvey survey;
    try {
        survey = synth::generate_survey(a.survey);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    synth::WriteOptions w;
    w.extract_features = !a.no_features;
    w.features = feature_options(c);
    w.threads = c.threads;
    synth::write_survey(survey, c.out, w);
    out << "synthetic survey: " << survey.views.size() << " views, world "
        << survey.world.width << "x" << survey.world.height << ", radius "
        << fmt(survey.localization_radius_m) << " m, written to " << c.out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- extract

int cmd_extract(const fs::path& manifest_path, const RunConfig& c, std::ostream& out) {
    auto m = load_side(manifest_path, "--manifest", false, false);
    try {
        matching::extract_dataset_features(m, feature_options(c), c.threads);
    } catch (const std::exception& e) {
        throw UsageError(manifest_path.string() + ": feature extraction failed: " + e.what());
    }
    fs::create_directories(c.out);
    const std::string stem = manifest_path.stem().string();
    dataio::write_descriptors(*m.descriptors, c.out / (stem + ".uld"));
    dataio::write_keypoints(*m.keypoints, c.out / (stem + ".ulk"));

    // The rewritten manifest lives in the output directory, so every
    // relative reference back to the source tree is made absolute.
    dataio::DatasetManifest copy = m;
    copy.descriptor_file = stem + ".uld";
    copy.keypoint_file = stem + ".ulk";
    copy.image_dir = fs::absolute(m.resolve(m.image_dir.value_or("images")));
    for (auto& r : copy.records) {
        if (r.mask_path) r.mask_path = fs::absolute(m.resolve(*r.mask_path));
    }
    dataio::write_manifest(copy, c.out / (stem + ".jsonl"));
    out << "extracted " << m.size() << " images to " << c.out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- gt

int cmd_gt(const RunConfig& c, std::ostream& out) {
    auto [q, d] = load_sides(c, false, false);
    evaluation::GroundTruthOptions opts;
    opts.distance_3d = c.distance_3d;
    const auto qp = q.positions();
    const auto dp = d.positions();
    evaluation::GroundTruthMatrix gt;
    try {
        gt = evaluation::build_ground_truth(qp, dp, d.localization_radius_m, opts);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    std::string csv = "query_id,database_id\n";
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (!gt.at(j, i)) continue;
            csv += q.records[i].image_id + "," + d.records[j].image_id + "\n";
            ++pairs;
        }
    }
    fs::create_directories(c.out);
    write_text(c.out / "ground_truth.csv", csv);
    write_json(c.out / "ground_truth.json",
               {{"queries", q.size()},
                {"database", d.size()},
                {"localization_radius_m", d.localization_radius_m},
                {"distance_3d", c.distance_3d},
                {"positive_pairs", pairs},
                {"queries_with_positives", gt.queries_with_positives()}});
    out << pairs << " positive pairs, " << gt.queries_with_positives() << "/" << q.size()
        << " queries with a positive\n";
    return 0;
}

// ---------------------------------------------------------------- iou

int cmd_iou(const fs::path& registrations, const RunConfig& c, std::ostream& out) {
    auto [q, d] = load_sides(c, false, true);
    if (!fs::exists(registrations)) {
        throw UsageError("--registrations: file not found: " + registrations.string());
    }
    std::ifstream in(registrations);
    std::string line;
    std::size_t line_no = 0;
    std::string csv = "query_id,database_id,iou\n";
    fs::create_directories(c.out / "overlays");
    std::size_t scored = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = registrations.string() + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw UsageError(where + ": " + e.what());
        }
        if (!j.contains("homography") || !j["homography"].is_array() ||
            field<std::string>(j, "status", "") != "accepted") {
            continue;
        }
        const auto qid = field<std::string>(j, "query_id", "");
        const auto did = field<std::string>(j, "database_id", "");
        const auto qi = q.index_of(qid);
        const auto di = d.index_of(did);
        if (!qi) throw UsageError(where + ": query_id '" + qid + "' not in query manifest");
        if (!di) throw UsageError(where + ": database_id '" + did + "' not in database manifest");
        const auto& values = j["homography"];
        if (values.size() != 9) throw UsageError(where + ": homography needs 9 entries");
        Eigen::Matrix3d m;
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) m(r, k) = values[r * 3 + k].get<double>();
        }
        const auto h = geometry::Homography::from_matrix(m);
        if (!h) throw UsageError(where + ": singular homography");
        const auto& qr = q.records[*qi];
        const auto& dr = d.records[*di];
        if (!qr.mask_path || !dr.mask_path) continue;
        const auto qmask = dataio::load_mask(q.resolve(*qr.mask_path), qr.width_px, qr.height_px);
        const auto dmask = dataio::load_mask(d.resolve(*dr.mask_path), dr.width_px, dr.height_px);
        const auto overlay = maskops::make_overlay(dmask, qmask, *h);
        csv += qid + "," + did + "," + fmt(overlay.iou) + "\n";
        dataio::write_ppm(maskops::render_overlay(overlay),
                          c.out / "overlays" / overlay_name(qid, did));
        ++scored;
    }
    write_text(c.out / "iou.csv", csv);
    out << scored << " registrations scored, written to " << c.out.string() << "\n";
    return 0;
}

/// Value of --config if present, scanned before the real parse so that the
/// file provides defaults that explicit flags still override.
std::optional<fs::path> find_config(const std::vector<std::string>& args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return fs::path(args[i + 1]);
        if (args[i].starts_with("--config=")) return fs::path(args[i].substr(9));
    }
    return std::nullopt;
}

}  // namespace

json config_echo(const RunConfig& c) {
    json j;
    j["query"] = c.query.string();
    j["database"] = c.database.string();
    j["k"] = c.k;
    j["chi_px"] = c.chi_px;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["recall_k_max"] = c.recall_k_max;
    j["baselines"] = c.baselines;
    j["self_match"] = c.self_match;
    j["use_builtin_features"] = c.use_builtin_features;
    j["distance_3d"] = c.distance_3d;
    j["inlier_only_error"] = c.inlier_only_error;
    j["correspondences"] = c.correspondences ? json(c.correspondences->string()) : json(nullptr);
    j["ratio"] = c.ratio;
    j["max_keypoints"] = c.max_keypoints;
    j["patch_size"] = c.patch_size;
    return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    static const char* known[] = {"query",          "database",         "k",
                                  "chi_px",         "trials",           "seed",
                                  "recall_k_max",   "baselines",        "self_match",
                                  "use_builtin_features", "distance_3d", "inlier_only_error",
                                  "correspondences", "ratio",           "max_keypoints",
                                  "patch_size",     "threads",          "out"};
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known)) {
            throw std::invalid_argument("config field '" + key + "' is not recognised");
        }
    }
    c.query = field<std::string>(j, "query", c.query.string());
    c.database = field<std::string>(j, "database", c.database.string());
    c.k = field<std::size_t>(j, "k", c.k);
    c.chi_px = field<double>(j, "chi_px", c.chi_px);
    c.trials = field<std::size_t>(j, "trials", c.trials);
    c.seed = field<std::uint64_t>(j, "seed", c.seed);
    c.recall_k_max = field<std::size_t>(j, "recall_k_max", c.recall_k_max);
    c.baselines = field<std::vector<std::string>>(j, "baselines", c.baselines);
    c.self_match = field<bool>(j, "self_match", c.self_match);
    c.use_builtin_features = field<bool>(j, "use_builtin_features", c.use_builtin_features);
    c.distance_3d = field<bool>(j, "distance_3d", c.distance_3d);
    c.inlier_only_error = field<bool>(j, "inlier_only_error", c.inlier_only_error);
    if (j.contains("correspondences") && !j["correspondences"].is_null()) {
        c.correspondences = field<std::string>(j, "correspondences", "");
    }
    c.ratio = field<double>(j, "ratio", c.ratio);
    c.max_keypoints = field<std::size_t>(j, "max_keypoints", c.max_keypoints);
    c.patch_size = field<int>(j, "patch_size", c.patch_size);
    c.threads = field<unsigned>(j, "threads", c.threads);
    c.out = field<std::string>(j, "out", c.out.string());
    return c;
}

void validate(const RunConfig& c) {
    if (c.k < 1) throw std::invalid_argument("-K must be >= 1");
    if (!(c.chi_px > 0.0)) throw std::invalid_argument("--chi must be > 0");
    if (c.trials < 1) throw std::invalid_argument("--trials must be >= 1");
    if (c.recall_k_max < 1) throw std::invalid_argument("--recall-depth must be >= 1");
    if (!(c.ratio > 0.0 && c.ratio <= 1.0)) throw std::invalid_argument("--ratio must be in (0, 1]");
    if (c.max_keypoints < 1) throw std::invalid_argument("--max-keypoints must be >= 1");
    if (c.patch_size < 4 || c.patch_size % 2 != 0) {
        throw std::invalid_argument("--patch-size must be even and >= 4");
    }
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("UNDERLOC_SEED"); env && *env) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (*end != '\0') throw std::invalid_argument("UNDERLOC_SEED is not an unsigned integer");
        return v;
    }
    return 42;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::optional<std::uint64_t> seed_from_config;
    try {
        if (const auto path = find_config(args)) {
            std::ifstream f(*path);
            if (!f) throw UsageError("--config: file not found: " + path->string());
            json j;
            try {
                j = json::parse(f);
            } catch (const json::exception& e) {
                throw UsageError("--config: " + path->string() + ": " + e.what());
            }
            cfg = config_from_json(j);
            if (j.contains("seed")) seed_from_config = cfg.seed;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"Hierarchical underwater image localization: retrieval, local refinement, "
                 "registration and evaluation"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::optional<std::uint64_t> seed_flag;
    std::string config_path;
    std::string kind;
    std::string registrations;
    std::string manifest;
    SynthArgs synth_args;

    auto add_common = [&](CLI::App* s) {
        s->add_option("--seed", seed_flag, "Random seed (default: UNDERLOC_SEED or 42)");
        s->add_option("--threads", cfg.threads, "Worker threads, 0 = all cores");
        s->add_option("--out", cfg.out, "Output directory");
        s->add_option("--config", config_path, "JSON config (e.g. a previous config.json)");
    };
    auto add_sides = [&](CLI::App* s) {
        s->add_option("--query", cfg.query, "Query manifest (.jsonl)");
        s->add_option("--database", cfg.database, "Database manifest (.jsonl)");
        s->add_flag("--distance-3d", cfg.distance_3d, "Include depth in the place distance");
    };
    auto add_features = [&](CLI::App* s) {
        s->add_flag("--use-builtin-features", cfg.use_builtin_features,
                    "Compute features from the images instead of reading feature files");
        s->add_option("--ratio", cfg.ratio, "Matcher ratio test");
        s->add_option("--max-keypoints", cfg.max_keypoints, "Built-in detector keypoint cap");
        s->add_option("--patch-size", cfg.patch_size, "Built-in descriptor patch side");
        s->add_flag("--self-match", cfg.self_match,
                    "Let a query retrieve the database image with the same id");
    };

    auto* run = app.add_subcommand("run", "Hierarchical pipeline with metrics and artifacts");
    add_common(run);
    add_sides(run);
    add_features(run);
    run->add_option("-K,--top-k", cfg.k, "Retrieval candidates refined per query");
    run->add_option("--chi", cfg.chi_px, "Registration acceptance threshold (px)");
    run->add_option("--trials", cfg.trials, "Random baseline trials per query");
    run->add_option("--recall-depth", cfg.recall_k_max, "Largest K in the recall curves");
    run->add_option("--baseline", cfg.baselines, "Extra series: random, bruteforce")
        ->check(CLI::IsMember({"random", "bruteforce"}));
    run->add_flag("--inlier-only-error", cfg.inlier_only_error,
                  "Compute e_r on RANSAC inliers only");
    run->add_option("--correspondences", cfg.correspondences,
                    "Precomputed correspondences (ULC1) replacing built-in matching");

    auto* baseline = app.add_subcommand("baseline", "Random or brute-force baseline");
    add_common(baseline);
    add_sides(baseline);
    add_features(baseline);
    baseline->add_option("--kind", kind, "random or bruteforce")->required();
    baseline->add_option("--trials", cfg.trials, "Trials per query (random)");
    baseline->add_option("--recall-depth", cfg.recall_k_max, "Largest K in the recall curve");

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic survey dataset");
    add_common(synth_cmd);
    auto& so = synth_args.survey;
    synth_cmd->add_option("--pattern", synth_args.pattern, "lawnmower or transect");
    synth_cmd->add_option("--views", so.n_views, "Views per pass");
    synth_cmd->add_option("--passes", so.passes, "Passes (pass 0 = database)");
    synth_cmd->add_option("--overlap", so.overlap_fraction, "Neighbour overlap fraction");
    synth_cmd->add_option("--views-per-leg", so.views_per_leg, "Lawnmower leg length");
    synth_cmd->add_option("--view-width", so.view_width, "View width (px)");
    synth_cmd->add_option("--view-height", so.view_height, "View height (px)");
    synth_cmd->add_option("--gain", so.perturbation.brightness_gain, "Revisit brightness gain");
    synth_cmd->add_option("--noise", so.perturbation.additive_noise_sigma,
                          "Revisit noise sigma (intensity units)");
    synth_cmd->add_option("--haze", so.perturbation.haze_strength, "Revisit haze strength");
    synth_cmd->add_option("--yaw-jitter", so.yaw_jitter_deg, "Revisit yaw jitter (deg)");
    synth_cmd->add_option("--scale-jitter", so.scale_jitter, "Revisit scale jitter");
    synth_cmd->add_option("--offset", so.revisit_offset_px, "Revisit position jitter (px)");
    synth_cmd->add_option("--radius", so.localization_radius_m, "Localization radius (m)");
    synth_cmd->add_flag("--no-features", synth_args.no_features, "Skip feature extraction");
    synth_cmd->add_option("--max-keypoints", cfg.max_keypoints, "Built-in detector keypoint cap");
    synth_cmd->add_option("--patch-size", cfg.patch_size, "Built-in descriptor patch side");

    auto* extract = app.add_subcommand("extract", "Built-in global and local features");
    add_common(extract);
    extract->add_option("--manifest", manifest, "Manifest whose images to process")->required();
    extract->add_option("--max-keypoints", cfg.max_keypoints, "Keypoint cap");
    extract->add_option("--patch-size", cfg.patch_size, "Descriptor patch side");

    auto* gt = app.add_subcommand("gt", "Ground-truth matrix only");
    add_common(gt);
    add_sides(gt);

    auto* iou = app.add_subcommand("iou", "Mask warp and IoU for a registrations file");
    add_common(iou);
    add_sides(iou);
    iou->add_option("--registrations", registrations, "registrations.jsonl")->required();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        cfg.seed = resolve_seed(seed_flag ? seed_flag : seed_from_config);
        if (run->parsed()) return cmd_run(cfg, out);
        if (baseline->parsed()) return cmd_baseline(cfg, kind, out);
        if (synth_cmd->parsed()) return cmd_synth(synth_args, cfg.seed, cfg, out);
        if (extract->parsed()) return cmd_extract(manifest, cfg, out);
        if (gt->parsed()) return cmd_gt(cfg, out);
        if (iou->parsed()) return cmd_iou(registrations, cfg, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ConsistencyError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace underloc::cli

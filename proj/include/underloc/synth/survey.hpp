#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "underloc/dataio/types.hpp"
#include "underloc/matching/features.hpp"

namespace underloc::synth {

enum class TrajectoryPattern { lawnmower, transect };

/// Appearance change applied to every revisit pass (pass index >= 1):
/// haze blends toward mid-gray, then the gain scales intensities, then
/// Gaussian noise (sigma in [0, 1] intensity units) is added.
struct Perturbation {
    double brightness_gain = 1.0;
    double additive_noise_sigma = 0.0;
    double haze_strength = 0.0;
};

struct SurveyOptions {
    std::uint64_t seed = 42;
    TrajectoryPattern pattern = TrajectoryPattern::lawnmower;
    /// Views per pass.
    std::size_t n_views = 16;
    std::size_t passes = 2;
    /// Fraction of a view shared with its along-track neighbour (and, for
    /// lawnmower, with the adjacent leg).
    double overlap_fraction = 0.6;
    Perturbation perturbation;

    int view_width = 160;
    int view_height = 120;
    double meters_per_pixel = 0.01;
    /// 0 = lawnmower legs of ceil(sqrt(n_views)) views.
    std::size_t views_per_leg = 0;
    /// 0 = fit the world texture around the trajectory.
    int world_width = 0;
    int world_height = 0;
    int world_margin_px = 24;

    /// Revisit-pass pose noise. With all three at zero every pass repeats
    /// the first pass exactly.
    double yaw_jitter_deg = 0.0;
    double scale_jitter = 0.0;
    double revisit_offset_px = 0.0;

    /// 0 = half the smaller trajectory step.
    double localization_radius_m = 0.0;
};

struct SyntheticView {
    dataio::ImageRecord record;
    std::size_t pass = 0;
    std::size_t index_in_pass = 0;
    /// World pixel coordinates to view pixel coordinates (similarity).
    Eigen::Matrix3d world_to_view = Eigen::Matrix3d::Identity();
    dataio::GrayImage image;
    dataio::BinaryMask mask;
};

struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double rx = 1.0;
    double ry = 1.0;
    double angle_rad = 0.0;

    [[nodiscard]] bool contains(double x, double y) const;
};

struct PairOverlap {
    std::size_t from = 0;
    std::size_t to = 0;
    /// Fraction of `from` that lands inside `to`, estimated on a grid.
    double overlap = 0.0;
};

struct SyntheticSurvey {
    SurveyOptions options;
    dataio::GrayImage world;
    dataio::BinaryMask world_mask;
    std::vector<Ellipse> organisms;
    std::vector<SyntheticView> views;
    std::vector<PairOverlap> overlaps;  // from < to, overlap > 0
    double localization_radius_m = 0.0;

    /// Maps pixel coordinates of view `from` to view `to`, h(2,2) = 1.
    [[nodiscard]] Eigen::Matrix3d homography(std::size_t from, std::size_t to) const;

    /// Fraction of `from` that lands inside `to`.
    [[nodiscard]] double overlap(std::size_t from, std::size_t to) const;

    [[nodiscard]] std::vector<std::size_t> views_in_pass(std::size_t pass) const;
};

/// Deterministic under `options.seed`. Throws std::invalid_argument for
/// n_views < 2, overlap outside [0, 1), or views leaving the world texture.
SyntheticSurvey generate_survey(const SurveyOptions& options);

/// Fraction of a grid of view-`from` pixel centers that maps inside view
/// `to` under `h`.
double overlap_fraction(const Eigen::Matrix3d& h, int from_width, int from_height, int to_width,
                        int to_height);

/// The manifest of one side: pass 0 is the database, later passes the
/// queries. File references point at the layout written by write_survey.
dataio::DatasetManifest survey_manifest(const SyntheticSurvey& survey, dataio::DatasetRole role);

struct WriteOptions {
    /// Also run the built-in extractor and write descriptor/keypoint files.
    bool extract_features = true;
    matching::FeatureOptions features;
    unsigned threads = 0;
};

/// Writes database.jsonl, query.jsonl, images/<id>.pgm, masks/<id>.pgm,
/// homographies.json and (optionally) database/query .uld/.ulk files.
void write_survey(const SyntheticSurvey& survey, const std::filesystem::path& dir,
                  const WriteOptions& options = {});

}  // namespace underloc::synth

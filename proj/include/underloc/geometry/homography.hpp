#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "underloc/matching/correspondence.hpp"

namespace underloc::geometry {

/// Invertible 3x3 projective map with h(2,2) == 1. Maps database pixel
/// coordinates to query pixel coordinates: p_q ~ H * (p_d, 1).
class Homography {
public:
    /// Normalizes by h(2,2); nullopt if that entry is ~0, the matrix is
    /// non-finite, or |det| <= 1e-12 after normalization.
    static std::optional<Homography> from_matrix(const Eigen::Matrix3d& m);

    static Homography identity();

    [[nodiscard]] const Eigen::Matrix3d& matrix() const { return h_; }
    [[nodiscard]] Homography inverse() const;

    /// Perspective-divided image of p; nullopt when |w| < 1e-12.
    [[nodiscard]] std::optional<Eigen::Vector2d> apply(const Eigen::Vector2d& p) const;

private:
    explicit Homography(const Eigen::Matrix3d& h) : h_(h) {}
    Eigen::Matrix3d h_;
};

/// Perspective-divided mapping with an arbitrary 3x3 matrix.
std::optional<Eigen::Vector2d> transfer(const Eigen::Matrix3d& m, const Eigen::Vector2d& p);

/// Least-squares DLT on Hartley-normalized points (both sets translated to
/// their centroid and scaled to mean distance sqrt(2)). Uses the pairs
/// selected by `indices`, or all pairs when it is empty. nullopt when the
/// configuration is rank-deficient or the result is not invertible.
std::optional<Homography> fit_homography_dlt(std::span<const matching::Correspondence> pairs,
                                             std::span<const std::size_t> indices = {});

struct RansacOptions {
    /// Inlier when the RMS of the forward and backward transfer errors is
    /// at most this many pixels.
    double threshold_px = 3.0;
    double confidence = 0.995;
    std::size_t max_iterations = 2000;
    std::uint64_t seed = 42;
};

enum class FitStatus { ok, insufficient_matches, degenerate };

struct HomographyFit {
    FitStatus status = FitStatus::degenerate;
    std::optional<Homography> homography;
    std::vector<std::uint8_t> inlier_mask;
    std::size_t inlier_count = 0;
    std::size_t iterations = 0;
};

/// sqrt((|p_q - H p_d|^2 + |H^-1 p_q - p_d|^2) / 2); +inf if either
/// mapping hits the line at infinity.
double symmetric_transfer_error(const Homography& h, const Homography& h_inv,
                                const matching::Correspondence& c);

/// Normalized DLT inside RANSAC, then DLT refit on the consensus set.
/// Needs at least 4 pairs. Minimal samples with three collinear points in
/// either image are skipped; when no sample is usable the fit is
/// degenerate. When C(n, 4) fits in the iteration budget every 4-subset is
/// tried in lexicographic order instead of sampling.
HomographyFit estimate_homography(const matching::CorrespondenceSet& c,
                                  const RansacOptions& options = {});

/// Bidirectional reprojection error: the mean of the forward RMSE
/// (p_q vs H p_d) and the backward RMSE (H^-1 p_q vs p_d) over the selected
/// pairs (all pairs when `mask` is empty). +inf if any mapping is at
/// infinity. Throws std::invalid_argument when no pair is selected.
double reprojection_error(const Homography& h, const matching::CorrespondenceSet& c,
                          std::span<const std::uint8_t> mask = {});

}  // namespace underloc::geometry

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "underloc/geometry/homography.hpp"

namespace underloc::geometry {

enum class RegistrationStatus {
    accepted,
    rejected_error_above_threshold,
    rejected_insufficient_matches,
    rejected_degenerate,
};

std::string to_string(RegistrationStatus status);
RegistrationStatus registration_status_from_string(const std::string& s);

inline constexpr double kDefaultChiPx = 10.0;

struct RegistrationResult {
    std::string query_image_id;
    std::string database_image_id;
    std::optional<Homography> homography;
    std::optional<double> reprojection_error_px;
    std::size_t correspondence_count = 0;
    std::size_t ransac_inlier_count = 0;
    RegistrationStatus status = RegistrationStatus::rejected_insufficient_matches;
};

struct RegistrationOptions {
    RansacOptions ransac;
    double chi_px = kDefaultChiPx;
    /// Evaluate e_r on the RANSAC consensus only instead of on every pair.
    bool inlier_only_error = false;
};

/// Estimates H for one pair, computes e_r and applies the chi filter.
RegistrationResult register_pair(const matching::CorrespondenceSet& c,
                                 const RegistrationOptions& options = {});

/// Marks every result carrying an error as accepted when e_r <= chi and as
/// rejected_error_above_threshold otherwise, then returns the accepted ones.
/// Results without an error keep their rejection status.
std::vector<RegistrationResult> filter_by_threshold(std::vector<RegistrationResult>& results,
                                                    double chi_px);

/// One JSON-Lines object: ids, 9 row-major homography entries (null when
/// absent), e_r (null when absent or infinite), counts and status.
nlohmann::json to_json(const RegistrationResult& r);

}  // namespace underloc::geometry

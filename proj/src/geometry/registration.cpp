#include "underloc/geometry/registration.hpp"

#include <cmath>
#include <stdexcept>

namespace underloc::geometry {

std::string to_string(RegistrationStatus status) {
    switch (status) {
        case RegistrationStatus::accepted: return "accepted";
        case RegistrationStatus::rejected_error_above_threshold:
            return "rejected_error_above_threshold";
        case RegistrationStatus::rejected_insufficient_matches:
            return "rejected_insufficient_matches";
        case RegistrationStatus::rejected_degenerate: return "rejected_degenerate";
    }
    return "unknown";
}

RegistrationStatus registration_status_from_string(const std::string& s) {
    for (const auto status :
         {RegistrationStatus::accepted, RegistrationStatus::rejected_error_above_threshold,
          RegistrationStatus::rejected_insufficient_matches,
          RegistrationStatus::rejected_degenerate}) {
        if (to_string(status) == s) return status;
    }
    throw std::invalid_argument("unknown registration status '" + s + "'");
}

RegistrationResult register_pair(const matching::CorrespondenceSet& c,
                                 const RegistrationOptions& options) {
    RegistrationResult r;
    r.query_image_id = c.query_image_id;
    r.database_image_id = c.database_image_id;
    r.correspondence_count = c.size();

    const HomographyFit fit = estimate_homography(c, options.ransac);
    if (fit.status == FitStatus::insufficient_matches) {
        r.status = RegistrationStatus::rejected_insufficient_matches;
        return r;
    }
    if (fit.status == FitStatus::degenerate || !fit.homography) {
        r.status = RegistrationStatus::rejected_degenerate;
        return r;
    }
    r.homography = fit.homography;
    r.ransac_inlier_count = fit.inlier_count;
    r.reprojection_error_px =
        options.inlier_only_error
            ? reprojection_error(*fit.homography, c, fit.inlier_mask)
            : reprojection_error(*fit.homography, c);
    r.status = *r.reprojection_error_px <= options.chi_px
                   ? RegistrationStatus::accepted
                   : RegistrationStatus::rejected_error_above_threshold;
    return r;
}

std::vector<RegistrationResult> filter_by_threshold(std::vector<RegistrationResult>& results,
                                                    double chi_px) {
    if (!(chi_px > 0.0)) throw std::invalid_argument("chi must be > 0");
    std::vector<RegistrationResult> accepted;
    for (auto& r : results) {
        if (!r.reprojection_error_px || !r.homography) continue;
        // Inclusive bound; NaN and +inf fail the comparison.
        if (*r.reprojection_error_px <= chi_px) {
            r.status = RegistrationStatus::accepted;
            accepted.push_back(r);
        } else {
            r.status = RegistrationStatus::rejected_error_above_threshold;
        }
    }
    return accepted;
}

nlohmann::json to_json(const RegistrationResult& r) {
    nlohmann::json j;
    j["query_id"] = r.query_image_id;
    j["database_id"] = r.database_image_id;
    if (r.homography) {
        nlohmann::json h = nlohmann::json::array();
        const auto& m = r.homography->matrix();
        for (int row = 0; row < 3; ++row) {
            for (int col = 0; col < 3; ++col) h.push_back(m(row, col));
        }
        j["homography"] = h;
    } else {
        j["homography"] = nullptr;
    }
    if (r.reprojection_error_px && std::isfinite(*r.reprojection_error_px)) {
        j["reprojection_error_px"] = *r.reprojection_error_px;
    } else {
        j["reprojection_error_px"] = nullptr;
    }
    j["inlier_count"] = r.correspondence_count;
    j["ransac_inlier_count"] = r.ransac_inlier_count;
    j["status"] = to_string(r.status);
    return j;
}

}  // namespace underloc::geometry

#include "underloc/evaluation/ground_truth.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "underloc/common/errors.hpp"

namespace underloc::evaluation {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Planar {
    double x = 0.0;
    double y = 0.0;
    double depth = 0.0;
};

}  // namespace

std::size_t GroundTruthMatrix::positives(std::size_t query) const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < rows_; ++j) n += labels_[j * cols_ + query];
    return n;
}

bool GroundTruthMatrix::has_positive(std::size_t query) const {
    for (std::size_t j = 0; j < rows_; ++j) {
        if (labels_[j * cols_ + query]) return true;
    }
    return false;
}

std::size_t GroundTruthMatrix::queries_with_positives() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < cols_; ++i) n += has_positive(i) ? 1 : 0;
    return n;
}

EnuProjection::EnuProjection(double ref_latitude_deg, double ref_longitude_deg)
    : lat0_rad_(ref_latitude_deg * kDegToRad),
      lon0_rad_(ref_longitude_deg * kDegToRad),
      cos_lat0_(std::cos(ref_latitude_deg * kDegToRad)) {}

EnuProjection EnuProjection::about_centroid(std::span<const dataio::GeodeticPosition> positions) {
    double lat = 0.0;
    double lon = 0.0;
    for (const auto& p : positions) {
        lat += p.latitude_deg;
        lon += p.longitude_deg;
    }
    const double n = positions.empty() ? 1.0 : static_cast<double>(positions.size());
    return EnuProjection(lat / n, lon / n);
}

std::pair<double, double> EnuProjection::project(const dataio::GeodeticPosition& p) const {
    const double east = kEarthRadiusM * (p.longitude_deg * kDegToRad - lon0_rad_) * cos_lat0_;
    const double north = kEarthRadiusM * (p.latitude_deg * kDegToRad - lat0_rad_);
    return {east, north};
}

double haversine_m(const dataio::GeodeticPosition& a, const dataio::GeodeticPosition& b) {
    const double phi1 = a.latitude_deg * kDegToRad;
    const double phi2 = b.latitude_deg * kDegToRad;
    const double dphi = phi2 - phi1;
    const double dlambda = (b.longitude_deg - a.longitude_deg) * kDegToRad;
    const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

GroundTruthMatrix build_ground_truth(std::span<const dataio::GeoPosition> queries,
                                     std::span<const dataio::GeoPosition> database,
                                     double radius_m, const GroundTruthOptions& options) {
    if (!(radius_m > 0.0)) throw std::invalid_argument("localization radius must be > 0");

    std::optional<dataio::CoordinateConvention> convention;
    auto check = [&](const dataio::GeoPosition& p) {
        const auto c = dataio::convention_of(p);
        if (convention && *convention != c) {
            throw ConsistencyError("ground truth: query and database positions mix geodetic and "
                                   "local coordinates");
        }
        convention = c;
    };
    for (const auto& p : queries) check(p);
    for (const auto& p : database) check(p);

    std::vector<Planar> q_xy;
    std::vector<Planar> d_xy;
    if (convention == dataio::CoordinateConvention::geodetic) {
        std::vector<dataio::GeodeticPosition> all;
        for (const auto& p : queries) all.push_back(std::get<dataio::GeodeticPosition>(p));
        for (const auto& p : database) all.push_back(std::get<dataio::GeodeticPosition>(p));
        const auto proj = EnuProjection::about_centroid(all);
        auto to_planar = [&](const dataio::GeoPosition& p) {
            const auto& g = std::get<dataio::GeodeticPosition>(p);
            const auto [e, n] = proj.project(g);
            return Planar{e, n, g.depth_m.value_or(0.0)};
        };
        for (const auto& p : queries) q_xy.push_back(to_planar(p));
        for (const auto& p : database) d_xy.push_back(to_planar(p));
    } else {
        auto to_planar = [](const dataio::GeoPosition& p) {
            const auto& l = std::get<dataio::LocalPosition>(p);
            return Planar{l.x_m, l.y_m, l.depth_m.value_or(0.0)};
        };
        for (const auto& p : queries) q_xy.push_back(to_planar(p));
        for (const auto& p : database) d_xy.push_back(to_planar(p));
    }

    GroundTruthMatrix gt(database.size(), queries.size(), radius_m);
    for (std::size_t j = 0; j < d_xy.size(); ++j) {
        for (std::size_t i = 0; i < q_xy.size(); ++i) {
            const double dx = d_xy[j].x - q_xy[i].x;
            const double dy = d_xy[j].y - q_xy[i].y;
            const double dz = options.distance_3d ? d_xy[j].depth - q_xy[i].depth : 0.0;
            gt.set(j, i, std::sqrt(dx * dx + dy * dy + dz * dz) < radius_m);
        }
    }
    return gt;
}

}  // namespace underloc::evaluation

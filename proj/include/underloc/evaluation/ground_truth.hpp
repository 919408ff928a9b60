#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "underloc/dataio/types.hpp"

namespace underloc::evaluation {

/// |D| x |Q| "same place" labels. Row = database index, column = query.
class GroundTruthMatrix {
public:
    GroundTruthMatrix() = default;
    GroundTruthMatrix(std::size_t rows, std::size_t cols, double radius_m)
        : rows_(rows), cols_(cols), radius_m_(radius_m), labels_(rows * cols, 0) {}

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] double radius_m() const { return radius_m_; }

    [[nodiscard]] bool at(std::size_t db, std::size_t query) const {
        return labels_[db * cols_ + query] != 0;
    }
    void set(std::size_t db, std::size_t query, bool v) { labels_[db * cols_ + query] = v ? 1 : 0; }

    [[nodiscard]] std::size_t positives(std::size_t query) const;
    [[nodiscard]] bool has_positive(std::size_t query) const;
    [[nodiscard]] std::size_t queries_with_positives() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    double radius_m_ = 0.0;
    std::vector<std::uint8_t> labels_;
};

inline constexpr double kEarthRadiusM = 6371008.8;

/// Equirectangular east/north projection about a reference point, with the
/// longitude scale corrected by cos(reference latitude).
class EnuProjection {
public:
    EnuProjection(double ref_latitude_deg, double ref_longitude_deg);

    /// Reference at the mean latitude/longitude of the given positions.
    static EnuProjection about_centroid(std::span<const dataio::GeodeticPosition> positions);

    /// (east, north) in meters.
    [[nodiscard]] std::pair<double, double> project(const dataio::GeodeticPosition& p) const;

private:
    double lat0_rad_;
    double lon0_rad_;
    double cos_lat0_;
};

/// Great-circle distance on the mean-radius sphere.
double haversine_m(const dataio::GeodeticPosition& a, const dataio::GeodeticPosition& b);

struct GroundTruthOptions {
    /// Include the depth difference in the distance. Missing depths count
    /// as 0.
    bool distance_3d = false;
};

/// labels[j][i] = distance(database_j, query_i) < radius_m (strict).
/// Geodetic inputs are projected about the centroid of both sides; local
/// inputs use plain Euclidean distance. Throws ConsistencyError when the
/// two sides (or records within a side) mix conventions.
GroundTruthMatrix build_ground_truth(std::span<const dataio::GeoPosition> queries,
                                     std::span<const dataio::GeoPosition> database,
                                     double radius_m, const GroundTruthOptions& options = {});

}  // namespace underloc::evaluation

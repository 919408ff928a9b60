#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "underloc/dataio/types.hpp"

namespace underloc::matching {

/// Pixel position in double precision. Keypoints are stored as float32,
/// but correspondences also come from exact synthetic geometry.
struct PixelPoint {
    double x = 0.0;
    double y = 0.0;

    PixelPoint() = default;
    PixelPoint(double x_, double y_) : x(x_), y(y_) {}
    PixelPoint(const dataio::Point2& p) : x(p.x), y(p.y) {}  // NOLINT: implicit widening

    friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

struct Correspondence {
    PixelPoint query;     // pixels, query frame
    PixelPoint database;  // pixels, database frame

    friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

/// Keypoint correspondences between one query and one database image.
/// `keypoint_indices` is filled by the built-in matcher (query index,
/// database index per pair) and empty for ingested correspondences.
struct CorrespondenceSet {
    std::string query_image_id;
    std::string database_image_id;
    std::vector<Correspondence> pairs;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> keypoint_indices;

    [[nodiscard]] std::size_t size() const { return pairs.size(); }

    /// Same pairs with the query and database roles exchanged.
    [[nodiscard]] CorrespondenceSet swapped() const;
};

/// "ULC1": u32 record count; per record the query id, database id, u32 n,
/// then n x (f32 qx, qy, dx, dy).
void write_correspondences(const std::vector<CorrespondenceSet>& sets,
                           const std::filesystem::path& path);
std::vector<CorrespondenceSet> load_correspondences(const std::filesystem::path& path);

}  // namespace underloc::matching

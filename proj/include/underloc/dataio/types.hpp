#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace underloc::dataio {

enum class CoordinateConvention { geodetic, local };

struct GeodeticPosition {
    double latitude_deg = 0.0;   // WGS84, [-90, 90]
    double longitude_deg = 0.0;  // [-180, 180]
    std::optional<double> depth_m;
};

struct LocalPosition {
    double x_m = 0.0;
    double y_m = 0.0;
    std::optional<double> depth_m;
};

using GeoPosition = std::variant<GeodeticPosition, LocalPosition>;

CoordinateConvention convention_of(const GeoPosition& p);

struct ImageRecord {
    std::string image_id;
    std::string sequence_id;
    double timestamp = 0.0;  // seconds, UTC epoch
    GeoPosition position;
    int width_px = 0;
    int height_px = 0;
    std::optional<std::filesystem::path> mask_path;
};

struct GlobalDescriptor {
    std::string image_id;
    std::vector<float> values;
};

/// Descriptors of one dataset side. All vectors share `dimension`.
struct DescriptorSet {
    std::uint32_t dimension = 0;
    std::vector<GlobalDescriptor> items;

    [[nodiscard]] std::size_t size() const { return items.size(); }
};

struct Point2 {
    float x = 0.0f;
    float y = 0.0f;

    friend bool operator==(const Point2&, const Point2&) = default;
};

enum class DescriptorKind : std::uint8_t { float32 = 0, binary = 1 };

/// Keypoints and local descriptors of one image.
///
/// Descriptors are stored flat. For float32, `width` values per point; for
/// binary, `width` bits per point packed LSB-first into
/// bytes_per_descriptor() bytes.
struct KeypointSet {
    std::string image_id;
    DescriptorKind kind = DescriptorKind::float32;
    std::uint32_t width = 0;
    std::vector<Point2> points;
    std::vector<float> float_descriptors;
    std::vector<std::uint8_t> binary_descriptors;

    [[nodiscard]] std::size_t size() const { return points.size(); }
    [[nodiscard]] std::size_t bytes_per_descriptor() const { return (width + 7) / 8; }

    [[nodiscard]] const float* float_row(std::size_t i) const {
        return float_descriptors.data() + i * width;
    }
    [[nodiscard]] const std::uint8_t* binary_row(std::size_t i) const {
        return binary_descriptors.data() + i * bytes_per_descriptor();
    }

    /// Throws ConsistencyError when descriptor storage does not match
    /// the point count.
    void check_shape() const;

    friend bool operator==(const KeypointSet&, const KeypointSet&) = default;
};

/// Row-major boolean grid; one byte (0 or 1) per pixel.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false);

    [[nodiscard]] bool at(int x, int y) const {
        return bits[static_cast<std::size_t>(y) * width + x] != 0;
    }
    void set(int x, int y, bool v) {
        bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
    }
    [[nodiscard]] std::size_t popcount() const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// 8-bit-valued grayscale raster stored as floats in [0, 1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, float fill = 0.0f)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    [[nodiscard]] float at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    [[nodiscard]] bool empty() const { return pixels.empty(); }
};

enum class DatasetRole { query, database };

/// A validated dataset side. Records are in manifest order, and when the
/// referenced files are present `descriptors.items[i]` and `keypoints[i]`
/// belong to `records[i]`.
struct DatasetManifest {
    std::string name;
    DatasetRole role = DatasetRole::query;
    double localization_radius_m = 0.0;
    CoordinateConvention convention = CoordinateConvention::local;
    std::filesystem::path base_dir;
    std::optional<std::filesystem::path> descriptor_file;
    std::optional<std::filesystem::path> keypoint_file;
    std::optional<std::filesystem::path> image_dir;
    std::vector<ImageRecord> records;

    std::optional<DescriptorSet> descriptors;
    std::optional<std::vector<KeypointSet>> keypoints;

    [[nodiscard]] std::size_t size() const { return records.size(); }
    [[nodiscard]] std::optional<std::size_t> index_of(const std::string& image_id) const;
    [[nodiscard]] std::vector<GeoPosition> positions() const;

    /// Resolves a path stored in the manifest relative to its directory.
    [[nodiscard]] std::filesystem::path resolve(const std::filesystem::path& p) const;
};

}  // namespace underloc::dataio

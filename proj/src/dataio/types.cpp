#include "underloc/dataio/types.hpp"

#include <algorithm>
#include <numeric>

#include "underloc/common/errors.hpp"

namespace underloc::dataio {

CoordinateConvention convention_of(const GeoPosition& p) {
    return std::holds_alternative<GeodeticPosition>(p) ? CoordinateConvention::geodetic
                                                       : CoordinateConvention::local;
}

void KeypointSet::check_shape() const {
    const std::size_t expected_float = kind == DescriptorKind::float32 ? points.size() * width : 0;
    const std::size_t expected_binary =
        kind == DescriptorKind::binary ? points.size() * bytes_per_descriptor() : 0;
    if (float_descriptors.size() != expected_float ||
        binary_descriptors.size() != expected_binary) {
        throw ConsistencyError("keypoint set '" + image_id + "': descriptor count does not match " +
                               std::to_string(points.size()) + " points");
    }
}

BinaryMask::BinaryMask(int w, int h, bool fill)
    : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

std::size_t BinaryMask::popcount() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::optional<std::size_t> DatasetManifest::index_of(const std::string& image_id) const {
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].image_id == image_id) return i;
    }
    return std::nullopt;
}

std::vector<GeoPosition> DatasetManifest::positions() const {
    std::vector<GeoPosition> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.position);
    return out;
}

std::filesystem::path DatasetManifest::resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
}

}  // namespace underloc::dataio

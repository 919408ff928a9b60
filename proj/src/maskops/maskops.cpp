#include "underloc/maskops/maskops.hpp"

#include <cmath>
#include <string>

#include "underloc/common/errors.hpp"

namespace underloc::maskops {

namespace {

void require_same_size(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height) {
        throw DimensionMismatch("mask dimensions differ: " + std::to_string(a.width) + "x" +
                                std::to_string(a.height) + " vs " + std::to_string(b.width) +
                                "x" + std::to_string(b.height));
    }
}

/// Source pixel sampled by target pixel (x, y), or false when outside.
template <typename Visit>
void inverse_map(const geometry::Homography& h, int source_width, int source_height,
                 int target_width, int target_height, Visit&& visit) {
    const Eigen::Matrix3d& m = h.matrix();
    for (int y = 0; y < target_height; ++y) {
        for (int x = 0; x < target_width; ++x) {
            const double tx = x + 0.5;
            const double ty = y + 0.5;
            const double w = m(2, 0) * tx + m(2, 1) * ty + m(2, 2);
            if (!(std::abs(w) >= 1e-12)) continue;
            const double sx = (m(0, 0) * tx + m(0, 1) * ty + m(0, 2)) / w;
            const double sy = (m(1, 0) * tx + m(1, 1) * ty + m(1, 2)) / w;
            if (!(sx >= 0.0 && sy >= 0.0 && sx < source_width && sy < source_height)) continue;
            visit(x, y, static_cast<int>(std::floor(sx)), static_cast<int>(std::floor(sy)));
        }
    }
}

}  // namespace

BinaryMask merge_masks(std::span<const BinaryMask> instances, int width, int height) {
    BinaryMask out(width, height);
    for (const auto& m : instances) {
        require_same_size(out, m);
        for (std::size_t i = 0; i < m.bits.size(); ++i) out.bits[i] |= m.bits[i];
    }
    return out;
}

BinaryMask warp_mask(const BinaryMask& query_mask, const geometry::Homography& h,
                     int target_width, int target_height) {
    BinaryMask out(target_width, target_height);
    inverse_map(h, query_mask.width, query_mask.height, target_width, target_height,
                [&](int x, int y, int sx, int sy) { out.set(x, y, query_mask.at(sx, sy)); });
    return out;
}

BinaryMask warp_footprint(const geometry::Homography& h, int source_width, int source_height,
                          int target_width, int target_height) {
    BinaryMask out(target_width, target_height);
    inverse_map(h, source_width, source_height, target_width, target_height,
                [&](int x, int y, int, int) { out.set(x, y, true); });
    return out;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    require_same_size(a, b);
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        inter += a.bits[i] & b.bits[i];
        uni += a.bits[i] | b.bits[i];
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double mask_iou(const BinaryMask& a, const BinaryMask& b, const BinaryMask& region) {
    require_same_size(a, b);
    require_same_size(a, region);
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        if (!region.bits[i]) continue;
        inter += a.bits[i] & b.bits[i];
        uni += a.bits[i] | b.bits[i];
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

WarpedOverlay make_overlay(const BinaryMask& database_mask, const BinaryMask& query_mask,
                           const geometry::Homography& h) {
    WarpedOverlay o;
    o.database_mask = database_mask;
    o.warped_query_mask = warp_mask(query_mask, h, database_mask.width, database_mask.height);
    o.iou = mask_iou(o.database_mask, o.warped_query_mask);
    return o;
}

dataio::RgbImage render_overlay(const WarpedOverlay& overlay, const OverlayColors& colors) {
    const auto& db = overlay.database_mask;
    const auto& q = overlay.warped_query_mask;
    require_same_size(db, q);
    dataio::RgbImage img{db.width, db.height, {}};
    img.pixels.reserve(db.bits.size() * 3);
    for (std::size_t i = 0; i < db.bits.size(); ++i) {
        const bool in_db = db.bits[i] != 0;
        const bool in_q = q.bits[i] != 0;
        const dataio::Rgb& c = in_db && in_q ? colors.intersection
                               : in_db       ? colors.database_only
                               : in_q        ? colors.query_only
                                             : colors.background;
        img.pixels.insert(img.pixels.end(), c.begin(), c.end());
    }
    return img;
}

}  // namespace underloc::maskops

#pragma once

#include <span>

#include "underloc/dataio/image.hpp"
#include "underloc/dataio/types.hpp"
#include "underloc/geometry/homography.hpp"

namespace underloc::maskops {

using dataio::BinaryMask;

/// Pixelwise OR. An empty list yields an all-false mask of the given size.
/// Throws DimensionMismatch if instances differ in size from each other or
/// from (width, height).
BinaryMask merge_masks(std::span<const BinaryMask> instances, int width, int height);

/// Resamples a query-frame mask into the database frame. For each target
/// pixel center (x + 0.5, y + 0.5) the query mask is read at the nearest
/// pixel to pi(H * (x + 0.5, y + 0.5, 1)), H mapping database to query
/// coordinates. Samples outside the query frame are false.
BinaryMask warp_mask(const BinaryMask& query_mask, const geometry::Homography& h,
                     int target_width, int target_height);

/// Marks the target pixels whose sample lands inside the source frame.
BinaryMask warp_footprint(const geometry::Homography& h, int source_width, int source_height,
                          int target_width, int target_height);

/// |a & b| / |a | b|, or 0 when the union is empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// IoU restricted to the pixels set in `region`.
double mask_iou(const BinaryMask& a, const BinaryMask& b, const BinaryMask& region);

struct OverlayColors {
    dataio::Rgb background{0, 0, 0};
    dataio::Rgb database_only{0, 114, 178};
    dataio::Rgb query_only{230, 159, 0};
    dataio::Rgb intersection{0, 158, 115};
};

struct WarpedOverlay {
    BinaryMask database_mask;
    BinaryMask warped_query_mask;
    double iou = 0.0;
};

/// Warps the query mask into the database frame and scores the overlap.
WarpedOverlay make_overlay(const BinaryMask& database_mask, const BinaryMask& query_mask,
                           const geometry::Homography& h);

/// Colors each pixel by which of the two masks cover it.
dataio::RgbImage render_overlay(const WarpedOverlay& overlay, const OverlayColors& colors = {});

}  // namespace underloc::maskops

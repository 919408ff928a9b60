#pragma once

#include <cstddef>

#include "underloc/dataio/types.hpp"

namespace underloc::matching {

struct FeatureOptions {
    double harris_k = 0.04;
    int nms_radius_px = 4;
    std::size_t max_keypoints = 512;
    /// Side of the square patch descriptor; also sets the border margin
    /// (patch_size / 2 pixels).
    int patch_size = 16;
    /// Responses at or below this are not corners.
    double min_response = 1e-10;
};

/// Harris corners (3x3 Sobel gradients, 3x3 structure-tensor window),
/// disc non-max suppression, strongest `max_keypoints` kept, each with a
/// zero-mean unit-norm intensity patch as a float descriptor.
///
/// Coordinates use the pixel-area convention: pixel (i, j) covers
/// [i, i+1) x [j, j+1), so its center is (i + 0.5, j + 0.5). Peaks are
/// refined to subpixel by a 1-D parabola fit along each axis.
dataio::KeypointSet extract_features(const dataio::GrayImage& image,
                                     const FeatureOptions& options = {});

inline constexpr int kGlobalGrid = 16;

/// Box-averaged 16x16 thumbnail, flattened, zero-meaned and L2-normalized.
/// A constant image gives the zero vector.
dataio::GlobalDescriptor extract_global(const dataio::GrayImage& image);

}  // namespace underloc::matching

namespace underloc::matching {

/// Loads every image of the dataset from its image directory
/// (`<image_dir>/<image_id>.pgm`, default directory "images"), resamples it
/// to the record dimensions when they follow resize_policy, and fills the
/// manifest's descriptors and keypoints.
void extract_dataset_features(dataio::DatasetManifest& manifest,
                              const FeatureOptions& options = {}, unsigned threads = 0);

}  // namespace underloc::matching

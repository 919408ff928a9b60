#pragma once

#include <filesystem>
#include <vector>

#include "underloc/dataio/types.hpp"

namespace underloc::dataio {

/// "ULD1": u32 count, u32 dimension, then count x (id, dimension x f32).
DescriptorSet load_descriptors(const std::filesystem::path& path);
void write_descriptors(const DescriptorSet& descriptors, const std::filesystem::path& path);

/// "ULK1": u32 image count, u32 descriptor width, u8 kind; per image the
/// id, u32 point count, point count x (f32 x, f32 y), then the descriptors
/// (width x f32 each, or ceil(width/8) packed bytes each).
std::vector<KeypointSet> load_keypoints(const std::filesystem::path& path);
void write_keypoints(const std::vector<KeypointSet>& sets, const std::filesystem::path& path);

/// Checks the dimension and finiteness invariants of a descriptor set.
void validate_descriptors(const DescriptorSet& descriptors);

}  // namespace underloc::dataio

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "underloc/dataio/types.hpp"

namespace underloc::dataio {

/// Reads a binary PGM (P5, maxval 1..255).
GrayImage load_pgm(const std::filesystem::path& path);

/// Writes a binary PGM with maxval 255; values are clamped to [0, 1] and
/// rounded to the nearest level.
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

/// Reads a mask stored as P5 PGM: any pixel > 0 is true.
BinaryMask load_mask(const std::filesystem::path& path);

/// Like load_mask, but throws ConsistencyError unless the mask has the
/// expected dimensions.
BinaryMask load_mask(const std::filesystem::path& path, int expected_width, int expected_height);

/// Writes a mask as P5 PGM, maxval 255, true pixels as 255.
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

using Rgb = std::array<std::uint8_t, 3>;

/// Interleaved 8-bit RGB raster.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

/// Writes a binary PPM (P6, maxval 255).
void write_ppm(const RgbImage& image, const std::filesystem::path& path);

/// Quantizes every pixel to the nearest of the 256 PGM levels.
void quantize_to_8bit(GrayImage& image);

/// Area-weighted resampling to new dimensions.
GrayImage resample_area(const GrayImage& image, int new_width, int new_height);

}  // namespace underloc::dataio

#pragma once

namespace underloc::dataio {

struct ImageSize {
    int width = 0;
    int height = 0;

    friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

inline constexpr ImageSize kWorkingResolution{640, 480};

/// Fit-within-640x480 rule: scale = min(640/w, 480/h, 1), dimensions
/// rounded half-up. The limiting side lands exactly on its bound.
ImageSize resize_policy(int width, int height);

}  // namespace underloc::dataio

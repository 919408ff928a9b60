#include "underloc/dataio/resize.hpp"

#include <algorithm>
#include <cmath>

namespace underloc::dataio {

namespace {

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

ImageSize resize_policy(int width, int height) {
    const double sx = static_cast<double>(kWorkingResolution.width) / width;
    const double sy = static_cast<double>(kWorkingResolution.height) / height;
    if (sx >= 1.0 && sy >= 1.0) return {width, height};
    if (sx <= sy) {
        return {kWorkingResolution.width,
                std::clamp(round_half_up(height * sx), 1, kWorkingResolution.height)};
    }
    return {std::clamp(round_half_up(width * sy), 1, kWorkingResolution.width),
            kWorkingResolution.height};
}

}  // namespace underloc::dataio

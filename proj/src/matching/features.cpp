#include "underloc/matching/features.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

namespace underloc::matching {

namespace {

struct Peak {
    int x = 0;
    int y = 0;
    double response = 0.0;
};

/// Harris response per pixel; gradients use replicated borders.
std::vector<double> harris_response(const dataio::GrayImage& img, double k) {
    const int w = img.width;
    const int h = img.height;
    auto px = [&](int x, int y) {
        return static_cast<double>(img.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)));
    };

    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> ixx(n), iyy(n), ixy(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1) -
                               px(x - 1, y - 1) - 2.0 * px(x - 1, y) - px(x - 1, y + 1)) / 8.0;
            const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1) -
                               px(x - 1, y - 1) - 2.0 * px(x, y - 1) - px(x + 1, y - 1)) / 8.0;
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }

    std::vector<double> response(n, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    const std::size_t j =
                        static_cast<std::size_t>(yy) * w + std::clamp(x + dx, 0, w - 1);
                    sxx += ixx[j];
                    syy += iyy[j];
                    sxy += ixy[j];
                }
            }
            const double trace = sxx + syy;
            response[static_cast<std::size_t>(y) * w + x] = sxx * syy - sxy * sxy - k * trace * trace;
        }
    }
    return response;
}

/// Vertex offset of the parabola through (-1, a), (0, b), (1, c).
double parabola_offset(double a, double b, double c) {
    const double denom = a - 2.0 * b + c;
    if (!(denom < 0.0)) return 0.0;
    return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

}  // namespace

dataio::KeypointSet extract_features(const dataio::GrayImage& image, const FeatureOptions& options) {
    dataio::KeypointSet out;
    out.kind = dataio::DescriptorKind::float32;
    const int patch = options.patch_size;
    out.width = static_cast<std::uint32_t>(patch * patch);
    const int w = image.width;
    const int h = image.height;
    const int half = patch / 2;
    if (w < patch + 1 || h < patch + 1) return out;

    const auto response = harris_response(image, options.harris_k);
    auto r_at = [&](int x, int y) { return response[static_cast<std::size_t>(y) * w + x]; };

    const int rad = options.nms_radius_px;
    std::vector<Peak> peaks;
    // Corners closer than half a patch to the border are never kept, so
    // their patches are always fully inside the image.
    for (int y = half; y <= h - 1 - half; ++y) {
        for (int x = half; x <= w - 1 - half; ++x) {
            const double r = r_at(x, y);
            if (!(r > options.min_response)) continue;
            bool is_max = true;
            for (int dy = -rad; dy <= rad && is_max; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= h) continue;
                for (int dx = -rad; dx <= rad; ++dx) {
                    if ((dx == 0 && dy == 0) || dx * dx + dy * dy > rad * rad) continue;
                    const int xx = x + dx;
                    if (xx < 0 || xx >= w) continue;
                    const double other = r_at(xx, yy);
                    // Plateaus keep their first pixel in raster order.
                    const bool earlier = dy < 0 || (dy == 0 && dx < 0);
                    if (other > r || (earlier && other == r)) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) peaks.push_back({x, y, r});
        }
    }

    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        return std::tie(b.response, a.y, a.x) < std::tie(a.response, b.y, b.x);
    });

    const std::size_t dim = out.width;
    std::vector<double> buf(dim);
    for (const Peak& p : peaks) {
        if (out.points.size() >= options.max_keypoints) break;

        double mean = 0.0;
        std::size_t k = 0;
        for (int dy = -half; dy < patch - half; ++dy) {
            for (int dx = -half; dx < patch - half; ++dx) {
                buf[k] = image.at(p.x + dx, p.y + dy);
                mean += buf[k++];
            }
        }
        mean /= static_cast<double>(dim);
        double norm = 0.0;
        for (auto& v : buf) {
            v -= mean;
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-9) continue;

        const double ox = parabola_offset(r_at(p.x - 1, p.y), p.response, r_at(p.x + 1, p.y));
        const double oy = parabola_offset(r_at(p.x, p.y - 1), p.response, r_at(p.x, p.y + 1));
        out.points.push_back({static_cast<float>(p.x + 0.5 + ox), static_cast<float>(p.y + 0.5 + oy)});
        for (const double v : buf) out.float_descriptors.push_back(static_cast<float>(v / norm));
    }
    return out;
}

dataio::GlobalDescriptor extract_global(const dataio::GrayImage& image) {
    constexpr int g = kGlobalGrid;
    dataio::GlobalDescriptor out;
    out.values.assign(static_cast<std::size_t>(g) * g, 0.0f);
    if (image.empty()) return out;

    auto cell_range = [](int cell, int extent) {
        const int lo = cell * extent / g;
        const int hi = std::max(lo + 1, (cell + 1) * extent / g);
        return std::pair{std::min(lo, extent - 1), std::min(hi, extent)};
    };

    std::vector<double> cells(static_cast<std::size_t>(g) * g);
    for (int cy = 0; cy < g; ++cy) {
        const auto [y0, y1] = cell_range(cy, image.height);
        for (int cx = 0; cx < g; ++cx) {
            const auto [x0, x1] = cell_range(cx, image.width);
            double sum = 0.0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) sum += image.at(x, y);
            }
            cells[static_cast<std::size_t>(cy) * g + cx] =
                sum / static_cast<double>((y1 - y0) * (x1 - x0));
        }
    }

    double mean = 0.0;
    for (const double c : cells) mean += c;
    mean /= static_cast<double>(cells.size());
    double norm = 0.0;
    for (auto& c : cells) {
        c -= mean;
        norm += c * c;
    }
    norm = std::sqrt(norm);
    // Relative to the thumbnail mean so rounding on a constant image is
    // still recognized as constant.
    if (norm <= 1e-9 * std::max(1.0, std::abs(mean))) return out;
    for (std::size_t i = 0; i < cells.size(); ++i) out.values[i] = static_cast<float>(cells[i] / norm);
    return out;
}

}  // namespace underloc::matching

#include "underloc/matching/matcher.hpp"

#include <bit>
#include <limits>
#include <vector>

#include "underloc/common/errors.hpp"

namespace underloc::matching {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Neighbours {
    std::size_t best = 0;
    double best_dist = kInf;
    double second_dist = kInf;

    void offer(std::size_t idx, double d) {
        if (d < best_dist) {
            second_dist = best_dist;
            best_dist = d;
            best = idx;
        } else if (d < second_dist) {
            second_dist = d;
        }
    }
};

/// Squared Euclidean over float rows, accumulated in eight independent
/// float lanes so the compiler can vectorize it. The lane layout is fixed,
/// so the result does not depend on argument order.
double squared_l2(const float* x, const float* y, std::uint32_t width) {
    float lanes[8] = {};
    std::uint32_t k = 0;
    for (; k + 8 <= width; k += 8) {
        for (int l = 0; l < 8; ++l) {
            const float d = x[k + l] - y[k + l];
            lanes[l] += d * d;
        }
    }
    for (; k < width; ++k) {
        const float d = x[k] - y[k];
        lanes[k % 8] += d * d;
    }
    return static_cast<double>(((lanes[0] + lanes[4]) + (lanes[1] + lanes[5])) +
                               ((lanes[2] + lanes[6]) + (lanes[3] + lanes[7])));
}

/// Squared Euclidean for float rows, Hamming for packed bits. The ratio
/// test squares the ratio accordingly.
double descriptor_distance(const dataio::KeypointSet& a, std::size_t i,
                           const dataio::KeypointSet& b, std::size_t j) {
    if (a.kind == dataio::DescriptorKind::float32) {
        return squared_l2(a.float_row(i), b.float_row(j), a.width);
    }
    const std::uint8_t* x = a.binary_row(i);
    const std::uint8_t* y = b.binary_row(j);
    int bits = 0;
    for (std::size_t k = 0; k < a.bytes_per_descriptor(); ++k) {
        bits += std::popcount(static_cast<unsigned>(x[k] ^ y[k]));
    }
    return bits;
}

bool passes_ratio(const Neighbours& n, double ratio_threshold) {
    return n.best_dist < ratio_threshold * n.second_dist;
}

}  // namespace

CorrespondenceSet match_keypoints(const dataio::KeypointSet& a, const dataio::KeypointSet& b,
                                  const MatcherOptions& options) {
    if (a.kind != b.kind || a.width != b.width) {
        throw DimensionMismatch("keypoint descriptors differ in kind or width: '" + a.image_id +
                                "' vs '" + b.image_id + "'");
    }
    a.check_shape();
    b.check_shape();

    CorrespondenceSet out;
    out.query_image_id = a.image_id;
    out.database_image_id = b.image_id;
    if (a.size() == 0 || b.size() == 0) return out;

    std::vector<Neighbours> from_a(a.size());
    std::vector<Neighbours> from_b(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = descriptor_distance(a, i, b, j);
            from_a[i].offer(j, d);
            from_b[j].offer(i, d);
        }
    }

    const double threshold = a.kind == dataio::DescriptorKind::float32
                                 ? options.ratio * options.ratio
                                 : options.ratio;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Neighbours& na = from_a[i];
        if (!passes_ratio(na, threshold)) continue;
        const Neighbours& nb = from_b[na.best];
        if (nb.best != i || !passes_ratio(nb, threshold)) continue;
        out.pairs.push_back({a.points[i], b.points[na.best]});
        out.keypoint_indices.emplace_back(static_cast<std::uint32_t>(i),
                                          static_cast<std::uint32_t>(na.best));
    }
    return out;
}

}  // namespace underloc::matching

#include "underloc/geometry/homography.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "underloc/common/random.hpp"

namespace underloc::geometry {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Vector2d to_vec(const matching::PixelPoint& p) { return {p.x, p.y}; }

/// Similarity taking the points to centroid 0 and mean distance sqrt(2).
std::optional<Eigen::Matrix3d> hartley_normalizer(const std::vector<Eigen::Vector2d>& pts) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());
    double mean_dist = 0.0;
    for (const auto& p : pts) mean_dist += (p - centroid).norm();
    mean_dist /= static_cast<double>(pts.size());
    if (!(mean_dist > 1e-12)) return std::nullopt;
    const double s = std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d t;
    t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
    return t;
}

/// Twice the triangle area relative to the squared longest side, so the
/// test is independent of the coordinate scale.
bool collinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const Eigen::Vector2d u = b - a;
    const Eigen::Vector2d v = c - a;
    const double cross = std::abs(u.x() * v.y() - u.y() * v.x());
    const double scale = std::max({u.squaredNorm(), v.squaredNorm(), (c - b).squaredNorm()});
    return !(scale > 0.0) || cross <= 1e-9 * scale;
}

bool sample_degenerate(std::span<const matching::Correspondence> pairs,
                       const std::array<std::size_t, 4>& s) {
    static constexpr std::array<std::array<int, 3>, 4> kTriples{
        {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
    for (const auto& t : kTriples) {
        const auto& a = pairs[s[t[0]]];
        const auto& b = pairs[s[t[1]]];
        const auto& c = pairs[s[t[2]]];
        if (collinear(to_vec(a.query), to_vec(b.query), to_vec(c.query)) ||
            collinear(to_vec(a.database), to_vec(b.database), to_vec(c.database))) {
            return true;
        }
    }
    return false;
}

std::uint64_t choose4(std::uint64_t n) {
    if (n < 4) return 0;
    return n * (n - 1) / 2 * (n - 2) / 3 * (n - 3) / 4;
}

/// Source of 4-subsets: lexicographic enumeration or seeded sampling.
class SampleSource {
public:
    SampleSource(std::size_t n, bool exhaustive, std::uint64_t seed)
        : n_(n), exhaustive_(exhaustive), rng_(seed) {}

    bool next(std::array<std::size_t, 4>& out) {
        if (exhaustive_) {
            if (done_) return false;
            out = combo_;
            advance();
            return true;
        }
        for (std::size_t k = 0; k < 4; ++k) {
            bool fresh = false;
            while (!fresh) {
                out[k] = static_cast<std::size_t>(rng_.uniform_index(n_));
                fresh = std::find(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k),
                                  out[k]) == out.begin() + static_cast<std::ptrdiff_t>(k);
            }
        }
        return true;
    }

private:
    void advance() {
        int k = 3;
        while (k >= 0 && combo_[k] == n_ - 4 + static_cast<std::size_t>(k)) --k;
        if (k < 0) {
            done_ = true;
            return;
        }
        ++combo_[k];
        for (int m = k + 1; m < 4; ++m) combo_[m] = combo_[m - 1] + 1;
    }

    std::size_t n_;
    bool exhaustive_;
    Rng rng_;
    std::array<std::size_t, 4> combo_{0, 1, 2, 3};
    bool done_ = false;
};

std::size_t score(const Homography& h, std::span<const matching::Correspondence> pairs,
                  double threshold, std::vector<std::uint8_t>& mask) {
    const Homography h_inv = h.inverse();
    std::size_t count = 0;
    mask.assign(pairs.size(), 0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (symmetric_transfer_error(h, h_inv, pairs[i]) <= threshold) {
            mask[i] = 1;
            ++count;
        }
    }
    return count;
}

std::vector<std::size_t> selected(const std::vector<std::uint8_t>& mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) idx.push_back(i);
    }
    return idx;
}

}  // namespace

std::optional<Homography> Homography::from_matrix(const Eigen::Matrix3d& m) {
    if (!m.allFinite() || std::abs(m(2, 2)) < 1e-12) return std::nullopt;
    const Eigen::Matrix3d h = m / m(2, 2);
    if (!h.allFinite() || !(std::abs(h.determinant()) > 1e-12)) return std::nullopt;
    return Homography(h);
}

Homography Homography::identity() { return Homography(Eigen::Matrix3d::Identity()); }

Homography Homography::inverse() const {
    const Eigen::Matrix3d inv = h_.inverse();
    if (std::abs(inv(2, 2)) < 1e-12) {
        // Still invertible, but h(2,2) cannot be normalized to 1; keep the
        // raw inverse, which maps points identically.
        return Homography(inv);
    }
    return Homography(inv / inv(2, 2));
}

std::optional<Eigen::Vector2d> transfer(const Eigen::Matrix3d& m, const Eigen::Vector2d& p) {
    const Eigen::Vector3d q = m * Eigen::Vector3d(p.x(), p.y(), 1.0);
    if (!(std::abs(q.z()) >= 1e-12)) return std::nullopt;
    return Eigen::Vector2d(q.x() / q.z(), q.y() / q.z());
}

std::optional<Eigen::Vector2d> Homography::apply(const Eigen::Vector2d& p) const {
    return transfer(h_, p);
}

std::optional<Homography> fit_homography_dlt(std::span<const matching::Correspondence> pairs,
                                             std::span<const std::size_t> indices) {
    std::vector<std::size_t> all;
    if (indices.empty()) {
        all.resize(pairs.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        indices = all;
    }
    if (indices.size() < 4) return std::nullopt;

    std::vector<Eigen::Vector2d> src, dst;
    src.reserve(indices.size());
    dst.reserve(indices.size());
    for (const std::size_t i : indices) {
        src.push_back(to_vec(pairs[i].database));
        dst.push_back(to_vec(pairs[i].query));
    }
    const auto t_src = hartley_normalizer(src);
    const auto t_dst = hartley_normalizer(dst);
    if (!t_src || !t_dst) return std::nullopt;

    Eigen::MatrixXd a(2 * indices.size(), 9);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const Eigen::Vector3d s = *t_src * Eigen::Vector3d(src[k].x(), src[k].y(), 1.0);
        const Eigen::Vector3d d = *t_dst * Eigen::Vector3d(dst[k].x(), dst[k].y(), 1.0);
        const double x = s.x(), y = s.y();
        const double u = d.x(), v = d.y();
        a.row(2 * k) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
        a.row(2 * k + 1) << x, y, 1, 0, 0, 0, -u * x, -u * y, -u;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // A unique solution needs rank 8; the second-smallest singular value
    // must stand clear of zero.
    if (!(sv(7) > 1e-10 * sv(0))) return std::nullopt;
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    const Eigen::Matrix3d full = t_dst->inverse() * hn * *t_src;
    return Homography::from_matrix(full);
}

double symmetric_transfer_error(const Homography& h, const Homography& h_inv,
                                const matching::Correspondence& c) {
    const auto fwd = h.apply(to_vec(c.database));
    const auto bwd = h_inv.apply(to_vec(c.query));
    if (!fwd || !bwd) return kInf;
    const double ef = (to_vec(c.query) - *fwd).squaredNorm();
    const double eb = (to_vec(c.database) - *bwd).squaredNorm();
    return std::sqrt(0.5 * (ef + eb));
}

HomographyFit estimate_homography(const matching::CorrespondenceSet& c,
                                  const RansacOptions& options) {
    HomographyFit fit;
    const std::span<const matching::Correspondence> pairs(c.pairs);
    const std::size_t n = pairs.size();
    if (n < 4) {
        fit.status = FitStatus::insufficient_matches;
        return fit;
    }

    const bool exhaustive = choose4(n) <= options.max_iterations;
    SampleSource samples(n, exhaustive, options.seed);
    std::optional<Homography> best;
    std::vector<std::uint8_t> best_mask;
    std::vector<std::uint8_t> mask;
    std::size_t best_count = 0;
    std::size_t needed = options.max_iterations;
    std::array<std::size_t, 4> sample{};

    std::size_t iter = 0;
    for (; iter < needed && samples.next(sample); ++iter) {
        if (sample_degenerate(pairs, sample)) continue;
        const auto h = fit_homography_dlt(pairs, sample);
        if (!h) continue;
        const std::size_t count = score(*h, pairs, options.threshold_px, mask);
        if (count > best_count) {
            best_count = count;
            best = h;
            best_mask = mask;
            const double w = static_cast<double>(count) / static_cast<double>(n);
            const double p_fail = 1.0 - std::pow(w, 4);
            if (p_fail <= 0.0) {
                needed = iter + 1;
            } else {
                const double k = std::log(1.0 - options.confidence) / std::log(p_fail);
                if (std::isfinite(k)) {
                    needed = std::min(options.max_iterations,
                                      static_cast<std::size_t>(std::ceil(std::max(1.0, k))));
                }
            }
        }
    }
    fit.iterations = iter;
    if (!best) {
        fit.status = FitStatus::degenerate;
        return fit;
    }

    // Refit on the consensus until it stops growing.
    for (int round = 0; round < 5; ++round) {
        const auto idx = selected(best_mask);
        const auto refit = fit_homography_dlt(pairs, idx);
        if (!refit) break;
        const std::size_t count = score(*refit, pairs, options.threshold_px, mask);
        if (count < best_count) break;
        const bool same = mask == best_mask;
        best = refit;
        best_mask = mask;
        best_count = count;
        if (same) break;
    }

    fit.status = FitStatus::ok;
    fit.homography = best;
    fit.inlier_mask = std::move(best_mask);
    fit.inlier_count = best_count;
    return fit;
}

double reprojection_error(const Homography& h, const matching::CorrespondenceSet& c,
                          std::span<const std::uint8_t> mask) {
    if (!mask.empty() && mask.size() != c.pairs.size()) {
        throw std::invalid_argument("reprojection_error: mask size differs from pair count");
    }
    const Homography h_inv = h.inverse();
    double sum_fwd = 0.0;
    double sum_bwd = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < c.pairs.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        const auto& p = c.pairs[i];
        const auto fwd = h.apply(to_vec(p.database));
        const auto bwd = h_inv.apply(to_vec(p.query));
        if (!fwd || !bwd) return kInf;
        sum_fwd += (to_vec(p.query) - *fwd).squaredNorm();
        sum_bwd += (*bwd - to_vec(p.database)).squaredNorm();
        ++n;
    }
    if (n == 0) throw std::invalid_argument("reprojection_error: no correspondences");
    return 0.5 * (std::sqrt(sum_fwd / n) + std::sqrt(sum_bwd / n));
}

}  // namespace underloc::geometry

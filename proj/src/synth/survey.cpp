#include "underloc/synth/survey.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "underloc/common/random.hpp"
#include "underloc/dataio/formats.hpp"
#include "underloc/dataio/image.hpp"
#include "underloc/dataio/manifest.hpp"

namespace underloc::synth {

namespace {

struct Pose {
    Eigen::Vector2d center;  // world pixels
    double yaw_rad = 0.0;
    double scale = 1.0;
};

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

/// Multi-octave value noise rescaled to [0.15, 0.85].
dataio::GrayImage value_noise(int width, int height, Rng& rng) {
    struct Octave {
        int cell;
        double amplitude;
    };
    static constexpr Octave kOctaves[] = {{48, 1.0}, {24, 0.7}, {12, 0.5}, {6, 0.4}, {3, 0.3}};

    std::vector<double> acc(static_cast<std::size_t>(width) * height, 0.0);
    for (const auto& [cell, amplitude] : kOctaves) {
        const int gw = width / cell + 2;
        const int gh = height / cell + 2;
        std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
        for (auto& v : lattice) v = rng.uniform01();
        for (int y = 0; y < height; ++y) {
            const double fy = (y + 0.5) / cell;
            const int iy = static_cast<int>(fy);
            const double ty = smoothstep(fy - iy);
            for (int x = 0; x < width; ++x) {
                const double fx = (x + 0.5) / cell;
                const int ix = static_cast<int>(fx);
                const double tx = smoothstep(fx - ix);
                auto at = [&](int gx, int gy) { return lattice[static_cast<std::size_t>(gy) * gw + gx]; };
                const double top = at(ix, iy) * (1 - tx) + at(ix + 1, iy) * tx;
                const double bottom = at(ix, iy + 1) * (1 - tx) + at(ix + 1, iy + 1) * tx;
                acc[static_cast<std::size_t>(y) * width + x] += amplitude * (top * (1 - ty) + bottom * ty);
            }
        }
    }
    const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
    const double range = std::max(1e-12, *hi - *lo);
    dataio::GrayImage img(width, height);
    for (std::size_t i = 0; i < acc.size(); ++i) {
        img.pixels[i] = static_cast<float>(0.15 + 0.7 * (acc[i] - *lo) / range);
    }
    return img;
}

Eigen::Matrix3d world_to_view(const Pose& pose, int view_width, int view_height) {
    const double c = std::cos(-pose.yaw_rad) * pose.scale;
    const double s = std::sin(-pose.yaw_rad) * pose.scale;
    Eigen::Matrix3d sr;
    sr << c, -s, 0, s, c, 0, 0, 0, 1;
    Eigen::Matrix3d to_origin = Eigen::Matrix3d::Identity();
    to_origin(0, 2) = -pose.center.x();
    to_origin(1, 2) = -pose.center.y();
    Eigen::Matrix3d to_view = Eigen::Matrix3d::Identity();
    to_view(0, 2) = view_width / 2.0;
    to_view(1, 2) = view_height / 2.0;
    return to_view * sr * to_origin;
}

Eigen::Vector2d apply(const Eigen::Matrix3d& m, double x, double y) {
    const Eigen::Vector3d p = m * Eigen::Vector3d(x, y, 1.0);
    return {p.x() / p.z(), p.y() / p.z()};
}

std::vector<Pose> trajectory(const SurveyOptions& o, int& step_x, int& step_y) {
    step_x = std::max(1, static_cast<int>(std::lround(o.view_width * (1.0 - o.overlap_fraction))));
    step_y = std::max(1, static_cast<int>(std::lround(o.view_height * (1.0 - o.overlap_fraction))));
    std::vector<Pose> poses;
    poses.reserve(o.n_views);
    if (o.pattern == TrajectoryPattern::transect) {
        for (std::size_t v = 0; v < o.n_views; ++v) {
            poses.push_back({Eigen::Vector2d(static_cast<double>(v) * step_x, 0.0)});
        }
        return poses;
    }
    const std::size_t per_leg =
        o.views_per_leg > 0
            ? o.views_per_leg
            : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(o.n_views))));
    for (std::size_t v = 0; v < o.n_views; ++v) {
        const std::size_t leg = v / per_leg;
        const std::size_t pos = v % per_leg;
        const std::size_t col = leg % 2 == 0 ? pos : per_leg - 1 - pos;
        poses.push_back({Eigen::Vector2d(static_cast<double>(col) * step_x,
                                         static_cast<double>(leg) * step_y)});
    }
    return poses;
}

void check_options(const SurveyOptions& o) {
    if (o.n_views < 2) throw std::invalid_argument("synthetic survey needs n_views >= 2");
    if (o.passes < 1) throw std::invalid_argument("synthetic survey needs at least one pass");
    if (!(o.overlap_fraction >= 0.0 && o.overlap_fraction < 1.0)) {
        throw std::invalid_argument("overlap_fraction must be in [0, 1)");
    }
    if (o.view_width < 8 || o.view_height < 8) {
        throw std::invalid_argument("views must be at least 8x8 pixels");
    }
    if (!(o.meters_per_pixel > 0.0)) throw std::invalid_argument("meters_per_pixel must be > 0");
    if (!(o.perturbation.brightness_gain > 0.0)) {
        throw std::invalid_argument("brightness_gain must be > 0");
    }
}

std::string view_id(std::size_t pass, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "p%zu_v%04zu", pass, index);
    return buf;
}

nlohmann::json matrix_json(const Eigen::Matrix3d& m) {
    nlohmann::json a = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
    }
    return a;
}

}  // namespace

bool Ellipse::contains(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    const double u = (c * dx + s * dy) / rx;
    const double v = (-s * dx + c * dy) / ry;
    return u * u + v * v <= 1.0;
}

double overlap_fraction(const Eigen::Matrix3d& h, int from_width, int from_height, int to_width,
                        int to_height) {
    constexpr int kGrid = 16;
    int inside = 0;
    for (int gy = 0; gy < kGrid; ++gy) {
        for (int gx = 0; gx < kGrid; ++gx) {
            const double x = (gx + 0.5) * from_width / kGrid;
            const double y = (gy + 0.5) * from_height / kGrid;
            const Eigen::Vector2d p = apply(h, x, y);
            if (p.x() >= 0.0 && p.y() >= 0.0 && p.x() < to_width && p.y() < to_height) ++inside;
        }
    }
    return static_cast<double>(inside) / (kGrid * kGrid);
}

Eigen::Matrix3d SyntheticSurvey::homography(std::size_t from, std::size_t to) const {
    const Eigen::Matrix3d h = views.at(to).world_to_view * views.at(from).world_to_view.inverse();
    return h / h(2, 2);
}

double SyntheticSurvey::overlap(std::size_t from, std::size_t to) const {
    const auto& a = views.at(from).record;
    const auto& b = views.at(to).record;
    return overlap_fraction(homography(from, to), a.width_px, a.height_px, b.width_px, b.height_px);
}

std::vector<std::size_t> SyntheticSurvey::views_in_pass(std::size_t pass) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (views[i].pass == pass) out.push_back(i);
    }
    return out;
}

SyntheticSurvey generate_survey(const SurveyOptions& options) {
    check_options(options);
    SyntheticSurvey survey;
    survey.options = options;
    Rng rng(options.seed);

    int step_x = 0;
    int step_y = 0;
    const std::vector<Pose> base = trajectory(options, step_x, step_y);

    std::vector<Pose> poses;
    for (std::size_t pass = 0; pass < options.passes; ++pass) {
        for (const Pose& b : base) {
            Pose p = b;
            if (pass > 0) {
                p.yaw_rad = rng.uniform(-1.0, 1.0) * options.yaw_jitter_deg * std::numbers::pi / 180.0;
                p.scale = 1.0 + rng.uniform(-1.0, 1.0) * options.scale_jitter;
                p.center += Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)) *
                            options.revisit_offset_px;
            }
            poses.push_back(p);
        }
    }

    // Shift the trajectory by a whole number of pixels so the footprint
    // bounding box starts at the margin.
    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    for (const Pose& p : poses) {
        const Eigen::Matrix3d inv = world_to_view(p, options.view_width, options.view_height).inverse();
        for (const auto& [x, y] : {std::pair{0.0, 0.0},
                                   {static_cast<double>(options.view_width), 0.0},
                                   {0.0, static_cast<double>(options.view_height)},
                                   {static_cast<double>(options.view_width),
                                    static_cast<double>(options.view_height)}}) {
            const Eigen::Vector2d w = apply(inv, x, y);
            min_x = std::min(min_x, w.x());
            min_y = std::min(min_y, w.y());
            max_x = std::max(max_x, w.x());
            max_y = std::max(max_y, w.y());
        }
    }
    const Eigen::Vector2d shift(std::ceil(options.world_margin_px - min_x),
                                std::ceil(options.world_margin_px - min_y));
    for (Pose& p : poses) p.center += shift;
    const int world_w = options.world_width > 0
                            ? options.world_width
                            : static_cast<int>(std::ceil(max_x + shift.x())) + options.world_margin_px;
    const int world_h = options.world_height > 0
                            ? options.world_height
                            : static_cast<int>(std::ceil(max_y + shift.y())) + options.world_margin_px;
    if (max_x + shift.x() > world_w || max_y + shift.y() > world_h) {
        throw std::invalid_argument("synthetic views extend beyond the " + std::to_string(world_w) +
                                    "x" + std::to_string(world_h) + " world texture");
    }

    survey.world = value_noise(world_w, world_h, rng);
    survey.world_mask = dataio::BinaryMask(world_w, world_h);

    const std::size_t organism_count =
        std::max<std::size_t>(1, static_cast<std::size_t>(world_w) * world_h / 3600);
    for (std::size_t k = 0; k < organism_count; ++k) {
        Ellipse e;
        e.cx = rng.uniform(0.0, world_w);
        e.cy = rng.uniform(0.0, world_h);
        e.rx = rng.uniform(6.0, 22.0);
        e.ry = e.rx * rng.uniform(0.45, 1.0);
        e.angle_rad = rng.uniform(0.0, std::numbers::pi);
        const double tone = rng.uniform01() < 0.5 ? rng.uniform(0.02, 0.2) : rng.uniform(0.8, 0.98);
        const int x0 = std::max(0, static_cast<int>(e.cx - e.rx - 1));
        const int x1 = std::min(world_w - 1, static_cast<int>(e.cx + e.rx + 1));
        const int y0 = std::max(0, static_cast<int>(e.cy - e.rx - 1));
        const int y1 = std::min(world_h - 1, static_cast<int>(e.cy + e.rx + 1));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                if (!e.contains(x + 0.5, y + 0.5)) continue;
                float& v = survey.world.at(x, y);
                v = static_cast<float>(0.45 * v + 0.55 * tone);
                survey.world_mask.set(x, y, true);
            }
        }
        survey.organisms.push_back(e);
    }
    dataio::quantize_to_8bit(survey.world);

    survey.localization_radius_m =
        options.localization_radius_m > 0.0
            ? options.localization_radius_m
            : 0.5 * std::min(step_x, options.pattern == TrajectoryPattern::transect ? step_x : step_y) *
                  options.meters_per_pixel;

    const int vw = options.view_width;
    const int vh = options.view_height;
    for (std::size_t n = 0; n < poses.size(); ++n) {
        SyntheticView view;
        view.pass = n / options.n_views;
        view.index_in_pass = n % options.n_views;
        view.world_to_view = world_to_view(poses[n], vw, vh);
        const Eigen::Matrix3d view_to_world = view.world_to_view.inverse();

        auto& rec = view.record;
        rec.image_id = view_id(view.pass, view.index_in_pass);
        rec.sequence_id = "pass" + std::to_string(view.pass);
        rec.timestamp = 1.5e9 + static_cast<double>(view.pass) * 31536000.0 +
                        static_cast<double>(view.index_in_pass);
        rec.position = dataio::LocalPosition{poses[n].center.x() * options.meters_per_pixel,
                                             poses[n].center.y() * options.meters_per_pixel,
                                             std::nullopt};
        rec.width_px = vw;
        rec.height_px = vh;
        rec.mask_path = std::filesystem::path("masks") / (rec.image_id + ".pgm");

        view.image = dataio::GrayImage(vw, vh);
        view.mask = dataio::BinaryMask(vw, vh);
        for (int y = 0; y < vh; ++y) {
            for (int x = 0; x < vw; ++x) {
                const Eigen::Vector2d w = apply(view_to_world, x + 0.5, y + 0.5);
                // Bilinear lookup with pixel centers at +0.5.
                const double u = std::clamp(w.x() - 0.5, 0.0, world_w - 1.0);
                const double v = std::clamp(w.y() - 0.5, 0.0, world_h - 1.0);
                const int iu = std::min(static_cast<int>(u), world_w - 2);
                const int iv = std::min(static_cast<int>(v), world_h - 2);
                const double fu = u - iu;
                const double fv = v - iv;
                const auto& wd = survey.world;
                const double top = wd.at(iu, iv) * (1 - fu) + wd.at(iu + 1, iv) * fu;
                const double bottom = wd.at(iu, iv + 1) * (1 - fu) + wd.at(iu + 1, iv + 1) * fu;
                view.image.at(x, y) = static_cast<float>(top * (1 - fv) + bottom * fv);

                // Exact containment at the pixel center, not a raster lookup.
                bool inside = false;
                for (const auto& e : survey.organisms) {
                    if (std::abs(w.x() - e.cx) <= e.rx && std::abs(w.y() - e.cy) <= e.rx &&
                        e.contains(w.x(), w.y())) {
                        inside = true;
                        break;
                    }
                }
                view.mask.set(x, y, inside);
            }
        }

        if (view.pass > 0) {
            const auto& pert = options.perturbation;
            Rng noise(derive_seed(options.seed, "noise", rec.image_id));
            for (float& px : view.image.pixels) {
                double v = (1.0 - pert.haze_strength) * px + pert.haze_strength * 0.5;
                v *= pert.brightness_gain;
                if (pert.additive_noise_sigma > 0.0) v += pert.additive_noise_sigma * noise.normal();
                px = static_cast<float>(v);
            }
        }
        dataio::quantize_to_8bit(view.image);
        survey.views.push_back(std::move(view));
    }

    for (std::size_t i = 0; i < survey.views.size(); ++i) {
        for (std::size_t j = i + 1; j < survey.views.size(); ++j) {
            const double ov = survey.overlap(i, j);
            if (ov > 0.0) survey.overlaps.push_back({i, j, ov});
        }
    }
    return survey;
}

dataio::DatasetManifest survey_manifest(const SyntheticSurvey& survey, dataio::DatasetRole role) {
    dataio::DatasetManifest m;
    const bool is_db = role == dataio::DatasetRole::database;
    m.name = "synth-" + std::to_string(survey.options.seed) + (is_db ? "-database" : "-query");
    m.role = role;
    m.localization_radius_m = survey.localization_radius_m;
    m.convention = dataio::CoordinateConvention::local;
    m.image_dir = "images";
    m.descriptor_file = is_db ? "database.uld" : "query.uld";
    m.keypoint_file = is_db ? "database.ulk" : "query.ulk";
    for (const auto& v : survey.views) {
        if ((v.pass == 0) == is_db) m.records.push_back(v.record);
    }
    return m;
}

void write_survey(const SyntheticSurvey& survey, const std::filesystem::path& dir,
                  const WriteOptions& options) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "masks");
    for (const auto& v : survey.views) {
        dataio::write_pgm(v.image, dir / "images" / (v.record.image_id + ".pgm"));
        dataio::write_mask(v.mask, dir / *v.record.mask_path);
    }

    for (const auto role : {dataio::DatasetRole::database, dataio::DatasetRole::query}) {
        auto m = survey_manifest(survey, role);
        m.base_dir = dir;
        const std::string stem = role == dataio::DatasetRole::database ? "database" : "query";
        if (options.extract_features) {
            matching::extract_dataset_features(m, options.features, options.threads);
            dataio::write_descriptors(*m.descriptors, dir / *m.descriptor_file);
            dataio::write_keypoints(*m.keypoints, dir / *m.keypoint_file);
        } else {
            m.descriptor_file.reset();
            m.keypoint_file.reset();
        }
        dataio::write_manifest(m, dir / (stem + ".jsonl"));
    }

    nlohmann::json sidecar;
    sidecar["convention"] = "maps pixel coordinates of view 'from' to view 'to'";
    sidecar["views"] = nlohmann::json::array();
    for (const auto& v : survey.views) {
        sidecar["views"].push_back({{"image_id", v.record.image_id},
                                    {"pass", v.pass},
                                    {"world_to_view", matrix_json(v.world_to_view)}});
    }
    sidecar["pairs"] = nlohmann::json::array();
    for (const auto& p : survey.overlaps) {
        sidecar["pairs"].push_back({{"from", survey.views[p.from].record.image_id},
                                    {"to", survey.views[p.to].record.image_id},
                                    {"overlap", p.overlap},
                                    {"h", matrix_json(survey.homography(p.from, p.to))}});
    }
    std::ofstream out(dir / "homographies.json", std::ios::trunc);
    out << sidecar.dump(1) << '\n';
}

}  // namespace underloc::synth

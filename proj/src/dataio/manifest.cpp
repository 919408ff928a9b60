#include "underloc/dataio/manifest.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "underloc/common/errors.hpp"
#include "underloc/dataio/formats.hpp"
#include "underloc/dataio/image.hpp"

namespace underloc::dataio {

namespace {

using nlohmann::json;

const std::set<std::string> kHeaderKeys = {"name",          "role",           "localization_radius_m",
                                           "coordinates",   "descriptor_file", "keypoint_file",
                                           "image_dir"};
const std::set<std::string> kRecordKeys = {"image_id", "sequence_id", "timestamp", "lat",
                                           "lon",      "depth",       "x",         "y",
                                           "width_px", "height_px",   "mask_path"};

class LineContext {
public:
    LineContext(const std::filesystem::path& path, std::size_t line) : path_(path), line_(line) {}

    [[noreturn]] void parse_error(const std::string& what) const {
        throw ParseError(prefix() + what);
    }
    [[noreturn]] void consistency_error(const std::string& what) const {
        throw ConsistencyError(prefix() + what);
    }

    const json& field(const json& obj, const char* key) const {
        const auto it = obj.find(key);
        if (it == obj.end()) parse_error(std::string("missing field '") + key + "'");
        return *it;
    }
    std::string string_field(const json& obj, const char* key) const {
        const json& v = field(obj, key);
        if (!v.is_string()) parse_error(std::string("field '") + key + "' must be a string");
        return v.get<std::string>();
    }
    double number_field(const json& obj, const char* key) const {
        const json& v = field(obj, key);
        if (!v.is_number()) parse_error(std::string("field '") + key + "' must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) parse_error(std::string("field '") + key + "' must be finite");
        return d;
    }
    int int_field(const json& obj, const char* key) const {
        const json& v = field(obj, key);
        if (!v.is_number_integer()) {
            parse_error(std::string("field '") + key + "' must be an integer");
        }
        return v.get<int>();
    }
    std::optional<std::string> optional_path(const json& obj, const char* key) const {
        const auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) parse_error(std::string("field '") + key + "' must be a string");
        return it->get<std::string>();
    }
    void reject_unknown(const json& obj, const std::set<std::string>& allowed) const {
        for (const auto& [key, value] : obj.items()) {
            if (!allowed.contains(key)) parse_error("unknown field '" + key + "'");
        }
    }

private:
    std::string prefix() const {
        return path_.string() + ":" + std::to_string(line_) + ": ";
    }

    const std::filesystem::path& path_;
    std::size_t line_;
};

GeoPosition parse_position(const json& obj, CoordinateConvention convention,
                           const LineContext& ctx, const std::string& id) {
    const bool has_geo = obj.contains("lat") || obj.contains("lon");
    const bool has_local = obj.contains("x") || obj.contains("y");
    if (has_geo && has_local) {
        ctx.consistency_error("image '" + id + "' mixes lat/lon and x/y coordinates");
    }
    std::optional<double> depth;
    if (obj.contains("depth") && !obj["depth"].is_null()) {
        depth = ctx.number_field(obj, "depth");
        if (*depth < 0.0) ctx.consistency_error("image '" + id + "' has negative depth");
    }
    if (convention == CoordinateConvention::geodetic) {
        if (has_local) {
            ctx.consistency_error("image '" + id +
                                  "' uses x/y but the dataset declares geodetic coordinates");
        }
        GeodeticPosition p{ctx.number_field(obj, "lat"), ctx.number_field(obj, "lon"), depth};
        if (p.latitude_deg < -90.0 || p.latitude_deg > 90.0) {
            ctx.consistency_error("image '" + id + "' latitude out of [-90, 90]");
        }
        if (p.longitude_deg < -180.0 || p.longitude_deg > 180.0) {
            ctx.consistency_error("image '" + id + "' longitude out of [-180, 180]");
        }
        return p;
    }
    if (has_geo) {
        ctx.consistency_error("image '" + id +
                              "' uses lat/lon but the dataset declares local coordinates");
    }
    return LocalPosition{ctx.number_field(obj, "x"), ctx.number_field(obj, "y"), depth};
}

template <typename Item>
std::vector<Item> align_to_records(std::vector<Item> items, const DatasetManifest& m,
                                   const std::filesystem::path& file) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < m.records.size(); ++i) index.emplace(m.records[i].image_id, i);

    std::vector<std::optional<Item>> slots(m.records.size());
    for (auto& item : items) {
        const auto it = index.find(item.image_id);
        if (it == index.end()) {
            throw ConsistencyError(file.string() + ": image_id '" + item.image_id +
                                   "' does not resolve to a manifest record");
        }
        if (slots[it->second]) {
            throw ConsistencyError(file.string() + ": image_id '" + item.image_id +
                                   "' appears more than once");
        }
        slots[it->second] = std::move(item);
    }
    std::vector<Item> out;
    out.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) {
            throw ConsistencyError(file.string() + ": no entry for image_id '" +
                                   m.records[i].image_id + "'");
        }
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

void check_keypoint_bounds(const KeypointSet& s, const ImageRecord& r,
                           const std::filesystem::path& file) {
    s.check_shape();
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        const auto& p = s.points[i];
        if (!(p.x >= 0.0f && p.x < static_cast<float>(r.width_px) && p.y >= 0.0f &&
              p.y < static_cast<float>(r.height_px))) {
            throw ConsistencyError(file.string() + ": keypoint " + std::to_string(i) +
                                   " of image '" + s.image_id + "' lies outside " +
                                   std::to_string(r.width_px) + "x" + std::to_string(r.height_px));
        }
    }
}

}  // namespace

std::string to_string(DatasetRole role) {
    return role == DatasetRole::query ? "query" : "database";
}

std::string to_string(CoordinateConvention convention) {
    return convention == CoordinateConvention::geodetic ? "geodetic" : "local";
}

DatasetManifest load_manifest(const std::filesystem::path& path,
                              const ManifestLoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open manifest: " + path.string());

    DatasetManifest m;
    m.base_dir = path.parent_path();
    std::set<std::string> seen_ids;
    bool have_header = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const LineContext ctx(path, line_no);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            ctx.parse_error(std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) ctx.parse_error("expected a JSON object");

        if (!have_header) {
            ctx.reject_unknown(obj, kHeaderKeys);
            m.name = ctx.string_field(obj, "name");
            const std::string role = ctx.string_field(obj, "role");
            if (role == "query") {
                m.role = DatasetRole::query;
            } else if (role == "database") {
                m.role = DatasetRole::database;
            } else {
                ctx.parse_error("role must be 'query' or 'database', got '" + role + "'");
            }
            m.localization_radius_m = ctx.number_field(obj, "localization_radius_m");
            if (!(m.localization_radius_m > 0.0)) {
                ctx.consistency_error("localization_radius_m must be > 0");
            }
            const std::string conv = ctx.string_field(obj, "coordinates");
            if (conv == "geodetic") {
                m.convention = CoordinateConvention::geodetic;
            } else if (conv == "local") {
                m.convention = CoordinateConvention::local;
            } else {
                ctx.parse_error("coordinates must be 'geodetic' or 'local', got '" + conv + "'");
            }
            if (auto p = ctx.optional_path(obj, "descriptor_file")) m.descriptor_file = *p;
            if (auto p = ctx.optional_path(obj, "keypoint_file")) m.keypoint_file = *p;
            if (auto p = ctx.optional_path(obj, "image_dir")) m.image_dir = *p;
            have_header = true;
            continue;
        }

        ctx.reject_unknown(obj, kRecordKeys);
        ImageRecord r;
        r.image_id = ctx.string_field(obj, "image_id");
        if (r.image_id.empty()) ctx.parse_error("image_id must be non-empty");
        if (!seen_ids.insert(r.image_id).second) {
            ctx.consistency_error("duplicate image_id '" + r.image_id + "'");
        }
        r.sequence_id = ctx.string_field(obj, "sequence_id");
        r.timestamp = ctx.number_field(obj, "timestamp");
        r.position = parse_position(obj, m.convention, ctx, r.image_id);
        r.width_px = ctx.int_field(obj, "width_px");
        r.height_px = ctx.int_field(obj, "height_px");
        if (r.width_px < 1 || r.height_px < 1) {
            ctx.consistency_error("image '" + r.image_id + "' must have width_px, height_px >= 1");
        }
        if (auto p = ctx.optional_path(obj, "mask_path")) r.mask_path = *p;
        m.records.push_back(std::move(r));
    }
    if (!have_header) throw ParseError(path.string() + ": empty manifest (no header line)");

    if (options.check_masks) {
        for (const auto& r : m.records) {
            if (r.mask_path) load_mask(m.resolve(*r.mask_path), r.width_px, r.height_px);
        }
    }

    if (options.load_features) {
        if (m.descriptor_file) {
            const auto file = m.resolve(*m.descriptor_file);
            DescriptorSet set = load_descriptors(file);
            set.items = align_to_records(std::move(set.items), m, file);
            m.descriptors = std::move(set);
        }
        if (m.keypoint_file) {
            const auto file = m.resolve(*m.keypoint_file);
            auto sets = align_to_records(load_keypoints(file), m, file);
            for (std::size_t i = 0; i < sets.size(); ++i) {
                check_keypoint_bounds(sets[i], m.records[i], file);
            }
            m.keypoints = std::move(sets);
        }
    }
    return m;
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    json header = {{"name", m.name},
                   {"role", to_string(m.role)},
                   {"localization_radius_m", m.localization_radius_m},
                   {"coordinates", to_string(m.convention)}};
    if (m.descriptor_file) header["descriptor_file"] = m.descriptor_file->generic_string();
    if (m.keypoint_file) header["keypoint_file"] = m.keypoint_file->generic_string();
    if (m.image_dir) header["image_dir"] = m.image_dir->generic_string();

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << header.dump() << '\n';
    for (const auto& r : m.records) {
        json rec = {{"image_id", r.image_id},
                    {"sequence_id", r.sequence_id},
                    {"timestamp", r.timestamp},
                    {"width_px", r.width_px},
                    {"height_px", r.height_px}};
        std::optional<double> depth;
        if (const auto* g = std::get_if<GeodeticPosition>(&r.position)) {
            rec["lat"] = g->latitude_deg;
            rec["lon"] = g->longitude_deg;
            depth = g->depth_m;
        } else {
            const auto& l = std::get<LocalPosition>(r.position);
            rec["x"] = l.x_m;
            rec["y"] = l.y_m;
            depth = l.depth_m;
        }
        if (depth) rec["depth"] = *depth;
        if (r.mask_path) rec["mask_path"] = r.mask_path->generic_string();
        out << rec.dump() << '\n';
    }
}

}  // namespace underloc::dataio

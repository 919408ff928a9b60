#include "underloc/dataio/formats.hpp"

#include <cmath>
#include <cstring>

#include "underloc/common/errors.hpp"
#include "underloc/dataio/binary_io.hpp"

namespace underloc::dataio {

void validate_descriptors(const DescriptorSet& descriptors) {
    for (const auto& d : descriptors.items) {
        if (d.values.size() != descriptors.dimension) {
            throw ConsistencyError("descriptor '" + d.image_id + "' has dimension " +
                                   std::to_string(d.values.size()) + ", expected " +
                                   std::to_string(descriptors.dimension));
        }
        for (const float v : d.values) {
            if (!std::isfinite(v)) {
                throw ConsistencyError("descriptor '" + d.image_id + "' has a non-finite value");
            }
        }
    }
}

DescriptorSet load_descriptors(const std::filesystem::path& path) {
    auto in = ByteReader::from_file(path);
    in.expect_magic("ULD1");
    const std::uint32_t count = in.u32();
    DescriptorSet set;
    set.dimension = in.u32();
    set.items.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        GlobalDescriptor d;
        d.image_id = in.str();
        d.values.resize(set.dimension);
        for (auto& v : d.values) v = in.f32();
        set.items.push_back(std::move(d));
    }
    in.expect_end();
    validate_descriptors(set);
    return set;
}

void write_descriptors(const DescriptorSet& descriptors, const std::filesystem::path& path) {
    validate_descriptors(descriptors);
    ByteWriter out;
    out.magic("ULD1");
    out.u32(static_cast<std::uint32_t>(descriptors.items.size()));
    out.u32(descriptors.dimension);
    for (const auto& d : descriptors.items) {
        out.str(d.image_id);
        for (const float v : d.values) out.f32(v);
    }
    out.save(path);
}

std::vector<KeypointSet> load_keypoints(const std::filesystem::path& path) {
    auto in = ByteReader::from_file(path);
    in.expect_magic("ULK1");
    const std::uint32_t count = in.u32();
    const std::uint32_t width = in.u32();
    const std::uint8_t kind_byte = in.u8();
    if (kind_byte > 1) {
        throw ParseError(path.string() + ": unknown descriptor kind " + std::to_string(kind_byte));
    }
    const auto kind = static_cast<DescriptorKind>(kind_byte);

    std::vector<KeypointSet> sets;
    sets.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        KeypointSet s;
        s.image_id = in.str();
        s.kind = kind;
        s.width = width;
        const std::uint32_t n = in.u32();
        s.points.resize(n);
        for (auto& p : s.points) {
            p.x = in.f32();
            p.y = in.f32();
        }
        if (kind == DescriptorKind::float32) {
            s.float_descriptors.resize(static_cast<std::size_t>(n) * width);
            for (auto& v : s.float_descriptors) v = in.f32();
        } else {
            const auto bytes = in.raw(static_cast<std::size_t>(n) * s.bytes_per_descriptor());
            s.binary_descriptors.assign(bytes.begin(), bytes.end());
        }
        sets.push_back(std::move(s));
    }
    in.expect_end();
    return sets;
}

void write_keypoints(const std::vector<KeypointSet>& sets, const std::filesystem::path& path) {
    ByteWriter out;
    out.magic("ULK1");
    out.u32(static_cast<std::uint32_t>(sets.size()));
    const std::uint32_t width = sets.empty() ? 0 : sets.front().width;
    const DescriptorKind kind = sets.empty() ? DescriptorKind::float32 : sets.front().kind;
    out.u32(width);
    out.u8(static_cast<std::uint8_t>(kind));
    for (const auto& s : sets) {
        if (s.width != width || s.kind != kind) {
            throw ConsistencyError("keypoint set '" + s.image_id +
                                   "' differs in descriptor width or kind");
        }
        s.check_shape();
        out.str(s.image_id);
        out.u32(static_cast<std::uint32_t>(s.points.size()));
        for (const auto& p : s.points) {
            out.f32(p.x);
            out.f32(p.y);
        }
        if (kind == DescriptorKind::float32) {
            for (const float v : s.float_descriptors) out.f32(v);
        } else {
            out.raw(s.binary_descriptors);
        }
    }
    out.save(path);
}

}  // namespace underloc::dataio

#include "underloc/matching/correspondence.hpp"

#include "underloc/dataio/binary_io.hpp"

namespace underloc::matching {

CorrespondenceSet CorrespondenceSet::swapped() const {
    CorrespondenceSet out;
    out.query_image_id = database_image_id;
    out.database_image_id = query_image_id;
    out.pairs.reserve(pairs.size());
    for (const auto& c : pairs) out.pairs.push_back({c.database, c.query});
    out.keypoint_indices.reserve(keypoint_indices.size());
    for (const auto& [q, d] : keypoint_indices) out.keypoint_indices.emplace_back(d, q);
    return out;
}

void write_correspondences(const std::vector<CorrespondenceSet>& sets,
                           const std::filesystem::path& path) {
    dataio::ByteWriter out;
    out.magic("ULC1");
    out.u32(static_cast<std::uint32_t>(sets.size()));
    for (const auto& s : sets) {
        out.str(s.query_image_id);
        out.str(s.database_image_id);
        out.u32(static_cast<std::uint32_t>(s.pairs.size()));
        for (const auto& c : s.pairs) {
            out.f32(static_cast<float>(c.query.x));
            out.f32(static_cast<float>(c.query.y));
            out.f32(static_cast<float>(c.database.x));
            out.f32(static_cast<float>(c.database.y));
        }
    }
    out.save(path);
}

std::vector<CorrespondenceSet> load_correspondences(const std::filesystem::path& path) {
    auto in = dataio::ByteReader::from_file(path);
    in.expect_magic("ULC1");
    const std::uint32_t count = in.u32();
    std::vector<CorrespondenceSet> sets;
    sets.reserve(count);
    for (std::uint32_t r = 0; r < count; ++r) {
        CorrespondenceSet s;
        s.query_image_id = in.str();
        s.database_image_id = in.str();
        const std::uint32_t n = in.u32();
        s.pairs.resize(n);
        for (auto& c : s.pairs) {
            c.query.x = in.f32();
            c.query.y = in.f32();
            c.database.x = in.f32();
            c.database.y = in.f32();
        }
        sets.push_back(std::move(s));
    }
    in.expect_end();
    return sets;
}

}  // namespace underloc::matching

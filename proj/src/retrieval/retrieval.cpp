#include "underloc/retrieval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "underloc/common/errors.hpp"
#include "underloc/common/parallel.hpp"
#include "underloc/dataio/binary_io.hpp"

namespace underloc::retrieval {

namespace {

void check_dimensions(const dataio::DescriptorSet& queries, const dataio::DescriptorSet& database) {
    if (queries.dimension != database.dimension) {
        throw DimensionMismatch("descriptor dimension mismatch: queries d=" +
                                std::to_string(queries.dimension) + ", database d=" +
                                std::to_string(database.dimension));
    }
}

bool candidate_less(const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.database_index < b.database_index;
}

}  // namespace

std::vector<float> SimilarityMatrix::column(std::size_t query) const {
    std::vector<float> out(rows_);
    for (std::size_t j = 0; j < rows_; ++j) out[j] = at(j, query);
    return out;
}

double l2_distance(const float* a, const float* b, std::size_t dim) {
    double sum = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        sum += d * d;
    }
    return std::sqrt(sum);
}

std::vector<float> query_column(const dataio::DescriptorSet& queries,
                                const dataio::DescriptorSet& database, std::size_t query_index) {
    check_dimensions(queries, database);
    const auto& q = queries.items.at(query_index).values;
    std::vector<float> out(database.size());
    for (std::size_t j = 0; j < database.size(); ++j) {
        out[j] = static_cast<float>(
            l2_distance(database.items[j].values.data(), q.data(), database.dimension));
    }
    return out;
}

SimilarityMatrix compute_similarity(const dataio::DescriptorSet& queries,
                                    const dataio::DescriptorSet& database,
                                    const SimilarityOptions& options) {
    check_dimensions(queries, database);
    const std::size_t rows = database.size();
    const std::size_t cols = queries.size();
    if (cols != 0 && rows > options.max_dense_entries / cols) {
        throw std::length_error("similarity matrix " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " exceeds the dense cap; use per-query "
                                "streaming");
    }
    SimilarityMatrix s(rows, cols);
    // Each worker owns whole columns.
    parallel_for(cols, options.threads, [&](std::size_t i) {
        const auto& q = queries.items[i].values;
        for (std::size_t j = 0; j < rows; ++j) {
            s.at(j, i) = static_cast<float>(
                l2_distance(database.items[j].values.data(), q.data(), database.dimension));
        }
    });
    return s;
}

CandidateSet top_k(const std::vector<float>& column, std::size_t query_index, std::size_t k,
                   const std::vector<std::size_t>& excluded) {
    std::vector<Candidate> all;
    all.reserve(column.size());
    for (std::size_t j = 0; j < column.size(); ++j) {
        if (std::find(excluded.begin(), excluded.end(), j) != excluded.end()) continue;
        all.push_back({j, column[j]});
    }
    const std::size_t take = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                      candidate_less);
    all.resize(take);
    return {query_index, std::move(all)};
}

CandidateSet top_k(const SimilarityMatrix& s, std::size_t query_index, std::size_t k) {
    if (query_index >= s.cols()) throw std::out_of_range("query index out of range");
    return top_k(s.column(query_index), query_index, k);
}

void write_similarity(const SimilarityMatrix& s, const std::filesystem::path& path) {
    dataio::ByteWriter out;
    out.magic("ULS1");
    out.u32(static_cast<std::uint32_t>(s.rows()));
    out.u32(static_cast<std::uint32_t>(s.cols()));
    for (const float v : s.values()) out.f32(v);
    out.save(path);
}

SimilarityMatrix load_similarity(const std::filesystem::path& path) {
    auto in = dataio::ByteReader::from_file(path);
    in.expect_magic("ULS1");
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    SimilarityMatrix s(rows, cols);
    for (std::size_t j = 0; j < rows; ++j) {
        for (std::size_t i = 0; i < cols; ++i) s.at(j, i) = in.f32();
    }
    in.expect_end();
    return s;
}

}  // namespace underloc::retrieval

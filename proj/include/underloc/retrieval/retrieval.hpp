#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "underloc/dataio/types.hpp"

namespace underloc::retrieval {

/// Dense |D| x |Q| matrix of L2 distances. Row = database index,
/// column = query index. Smaller means more similar.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    SimilarityMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), values_(rows * cols, 0.0f) {}

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }

    [[nodiscard]] float at(std::size_t db, std::size_t query) const {
        return values_[db * cols_ + query];
    }
    float& at(std::size_t db, std::size_t query) { return values_[db * cols_ + query]; }

    [[nodiscard]] std::vector<float> column(std::size_t query) const;
    [[nodiscard]] const std::vector<float>& values() const { return values_; }

    friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> values_;
};

struct Candidate {
    std::size_t database_index = 0;
    float distance = 0.0f;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// The K nearest database entries of one query, ordered by
/// (distance, database_index) ascending.
struct CandidateSet {
    std::size_t query_index = 0;
    std::vector<Candidate> entries;
};

struct SimilarityOptions {
    unsigned threads = 0;
    /// Largest |D| * |Q| for which a dense matrix is materialized.
    std::size_t max_dense_entries = std::size_t{1} << 28;
};

/// Euclidean distance, accumulated in double.
double l2_distance(const float* a, const float* b, std::size_t dim);

/// values[j][i] = ||database_j - query_i||. Throws DimensionMismatch if the
/// two sides disagree on dimension, std::length_error above the dense cap.
SimilarityMatrix compute_similarity(const dataio::DescriptorSet& queries,
                                    const dataio::DescriptorSet& database,
                                    const SimilarityOptions& options = {});

/// Distances of every database descriptor to one query; the streaming path
/// for datasets above the dense cap.
std::vector<float> query_column(const dataio::DescriptorSet& queries,
                                const dataio::DescriptorSet& database, std::size_t query_index);

/// Selects min(K, |column|) entries with the smallest distances; ties go to
/// the smaller database index. Entries whose index is in `excluded` are
/// skipped.
CandidateSet top_k(const std::vector<float>& column, std::size_t query_index, std::size_t k,
                   const std::vector<std::size_t>& excluded = {});

CandidateSet top_k(const SimilarityMatrix& s, std::size_t query_index, std::size_t k);

/// "ULS1": u32 rows, u32 cols, rows x cols float32 row-major.
void write_similarity(const SimilarityMatrix& s, const std::filesystem::path& path);
SimilarityMatrix load_similarity(const std::filesystem::path& path);

}  // namespace underloc::retrieval

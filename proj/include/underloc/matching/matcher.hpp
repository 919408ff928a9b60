#pragma once

#include "underloc/dataio/types.hpp"
#include "underloc/matching/correspondence.hpp"

namespace underloc::matching {

struct MatcherOptions {
    /// Lowe ratio: keep when nearest < ratio * second nearest.
    double ratio = 0.8;
};

/// Mutual nearest neighbours that pass the ratio test in both directions.
/// Euclidean distance for float descriptors, Hamming for binary ones.
/// `a` plays the query role and `b` the database role in the result.
///
/// Throws DimensionMismatch when kinds or widths differ.
CorrespondenceSet match_keypoints(const dataio::KeypointSet& a, const dataio::KeypointSet& b,
                                  const MatcherOptions& options = {});

}  // namespace underloc::matching

#pragma once

#include <filesystem>
#include <string>

#include "underloc/dataio/types.hpp"

namespace underloc::dataio {

struct ManifestLoadOptions {
    /// Load and cross-check the descriptor and keypoint files named in the
    /// header. When false only the manifest itself is parsed and validated.
    bool load_features = true;
    /// Require every record's mask file to exist and match its dimensions.
    bool check_masks = true;
};

/// Parses a JSON-Lines manifest (header object on the first line, one
/// ImageRecord per following line) and validates it.
///
/// Throws ParseError for malformed lines or fields and ConsistencyError for
/// invariant violations; both messages name the offending line or image_id.
DatasetManifest load_manifest(const std::filesystem::path& path,
                              const ManifestLoadOptions& options = {});

/// Writes the header and records (not the feature files) as JSON-Lines.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

std::string to_string(DatasetRole role);
std::string to_string(CoordinateConvention convention);

}  // namespace underloc::dataio

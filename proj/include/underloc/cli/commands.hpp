#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace underloc::cli {

/// Everything that determines the output of `run` and `baseline`.
struct RunConfig {
    std::filesystem::path query;
    std::filesystem::path database;
    std::size_t k = 10;
    double chi_px = 10.0;
    std::size_t trials = 100;
    std::uint64_t seed = 42;
    std::size_t recall_k_max = 25;
    /// Extra series for recall.csv / pr.csv: "random", "bruteforce".
    std::vector<std::string> baselines;
    bool self_match = false;
    bool use_builtin_features = false;
    bool distance_3d = false;
    bool inlier_only_error = false;
    std::optional<std::filesystem::path> correspondences;

    double ratio = 0.8;
    std::size_t max_keypoints = 512;
    int patch_size = 16;

    // Not part of the result: neither affects any output byte.
    unsigned threads = 0;
    std::filesystem::path out = "underloc_out";
};

/// The result-relevant fields only (no threads, no output directory).
nlohmann::json config_echo(const RunConfig& c);

/// Reads a config echo (or a full config.json) on top of `base`. Throws
/// std::invalid_argument naming the offending field.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

/// Throws std::invalid_argument naming the first out-of-range field.
void validate(const RunConfig& c);

/// Seed precedence: explicit flag, then UNDERLOC_SEED, then 42.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag);

/// Full command line entry point. Returns the process exit code: 0 on
/// success, 1 on configuration or load errors (diagnostic on `err`).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace underloc::cli

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace underloc {

/// Seeded 64-bit generator with portable draws.
///
/// std::mt19937_64 has a fully specified output sequence, but the standard
/// distributions do not, so every draw used by the library goes through the
/// helpers below to keep results identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Uniform real in [0, 1) with 53 bits of mantissa.
    double uniform01();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal draw (Box-Muller, one value per call).
    double normal();

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; a good bijective mixer for seed derivation.
std::uint64_t mix64(std::uint64_t x);

/// Derives a per-item seed from a base seed and string keys, independent of
/// evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view a, std::string_view b = {});

}  // namespace underloc

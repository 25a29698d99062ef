#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace edgecasc {

using Rng = std::mt19937_64;

/// Stable 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Seed for an independent child stream keyed by (root, purpose, index).
/// Adding a device or a purpose never changes another stream's seed.
std::uint64_t child_seed(std::uint64_t root, std::string_view purpose, std::uint64_t index = 0);

inline Rng child_rng(std::uint64_t root, std::string_view purpose, std::uint64_t index = 0) {
    return Rng(child_seed(root, purpose, index));
}

/// Beta(alpha, beta) via the ratio of two gamma variates.
double sample_beta(Rng& rng, double alpha, double beta);

}  // namespace edgecasc

#include "edgecasc/rng.hpp"

namespace edgecasc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t child_seed(std::uint64_t root, std::string_view purpose, std::uint64_t index) {
    return splitmix64(splitmix64(root ^ fnv1a64(purpose)) + splitmix64(index));
}

double sample_beta(Rng& rng, double alpha, double beta) {
    std::gamma_distribution<double> ga(alpha, 1.0);
    std::gamma_distribution<double> gb(beta, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    if (x + y <= 0.0) return 0.5;
    return x / (x + y);
}

}  // namespace edgecasc

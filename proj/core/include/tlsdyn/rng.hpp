#pragma once

#include <cstdint>
#include <random>

namespace tlsdyn {

/// Every stochastic routine draws from one of these, seeded from a derived stream seed.
using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based substream derivation. Substream (master, i) is independent of the
/// order in which substreams are consumed, which keeps parallel runs reproducible.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t substream);

Engine make_engine(std::uint64_t seed);

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace tlsdyn

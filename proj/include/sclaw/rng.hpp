#pragma once

#include <cmath>
#include <cstdint>

namespace sclaw::rng {

// ============================================================================
// Counter-based random numbers.
//
// Every variate is a pure function of (seed, counter), so streams can be
// evaluated in any order -- or in parallel -- and still reproduce bit-for-bit.
// The generator is the splitmix64 finalizer applied to a mixed key; its
// avalanche behaviour is more than enough for Monte Carlo use here.
// ============================================================================

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Hash of a (seed, counter) pair.  Two rounds decorrelate nearby counters and
// nearby seeds; used both for variates and for deriving per-path seeds.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
    return splitmix64(splitmix64(seed ^ 0x243f6a8885a308d3ull) + counter);
}

// Uniform on (0,1]: take the top 53 bits, add 1 so that 0 is excluded.
// The closed right end keeps log(u) finite in the Gaussian transform.
inline double u01(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t bits = counter_hash(seed, counter);
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Standard normal via Box--Muller.  Counter k consumes uniforms 2k and 2k+1;
// the sine partner is discarded so each normal has an independent key.
inline double normal(std::uint64_t seed, std::uint64_t counter) {
    double u1 = u01(seed, 2 * counter);
    double u2 = u01(seed, 2 * counter + 1);
    double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace sclaw::rng

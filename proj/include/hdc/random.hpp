#ifndef HDC_RANDOM_HPP_
#define HDC_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

namespace hdc {

/// Engine used everywhere randomness is needed. Its output sequence is fixed
/// by the standard, and the helpers below avoid the implementation-defined
/// std distributions so that seeded runs are portable.
using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 random bits.
double uniform01(Rng& rng);
/// Uniform in [lo, hi).
double uniform(Rng& rng, double lo, double hi);
/// Uniform integer in [0, n), unbiased (rejection sampling). n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);
/// Standard normal via Box-Muller (one draw per call, no caching).
double standard_normal(Rng& rng);

/// splitmix64 finalizer, for deriving independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace hdc

#endif  // HDC_RANDOM_HPP_

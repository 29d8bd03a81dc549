#pragma once

#include <cstdint>
#include <random>

namespace nodal {

using Engine = std::mt19937_64;

// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Child seed for stream `index` of `base`. Distinct indices give
// statistically independent engines, and the mapping does not depend on
// how work is scheduled across threads.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0);

// Seed drawn from the OS entropy source; used when no --seed is given.
std::uint64_t entropy_seed();

}  // namespace nodal

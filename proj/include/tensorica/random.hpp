#pragma once

#include <cstdint>
#include <random>

namespace tensorica {

/// Stream generator: 64-bit Mersenne Twister (std::mt19937_64, fixed by the
/// standard), so identical seeds give identical streams on every platform.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Child seed for the `index`-th consumer of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

// Purposes for derived seeds, so that e.g. the mixing matrix of a replication
// never shares a stream with its observations.
enum class SeedPurpose : std::uint64_t { Mixing = 1, Init = 2, Stream = 3, Warmup = 4, Replication = 5 };

std::uint64_t derive_seed(std::uint64_t seed, SeedPurpose purpose) noexcept;

}  // namespace tensorica

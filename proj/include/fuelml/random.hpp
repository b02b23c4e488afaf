#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace fuelml {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream index (tree, fold, repeat, stage) into an
/// independent seed. Pure function, so work keyed by the index can be
/// scheduled in any order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Fisher-Yates shuffle of 0..n-1 driven by `seed`.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace fuelml

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace arfdx {

using Rng = std::mt19937_64;

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

std::uint64_t splitmix64(std::uint64_t x);

// Per-stage seeds: every stage derives its generator from the run seed and
// its own name so stages reproduce independently of each other.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace arfdx

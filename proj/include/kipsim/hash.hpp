#pragma once

#include <cstdint>
#include <string_view>

namespace kipsim {

// Seeded 64-bit hash with full avalanche (MurmurHash 64A construction).
// Stable across platforms and process restarts for the same seed.
std::uint64_t hash64(std::string_view key, std::uint64_t seed);

// Maps a key uniformly onto [0, n_buckets). n_buckets must be >= 1.
std::uint64_t uniform_hash(std::string_view key, std::uint64_t n_buckets,
                           std::uint64_t seed);

}  // namespace kipsim

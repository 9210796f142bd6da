#include "kipsim/hash.hpp"

#include <cstring>

namespace kipsim {

std::uint64_t hash64(std::string_view key, std::uint64_t seed) {
  const std::uint64_t m = 0xc6a4a7935bd1e995ULL;
  const int r = 47;

  std::uint64_t h = seed ^ (key.size() * m);

  const unsigned char* data =
      reinterpret_cast<const unsigned char*>(key.data());
  std::size_t n = key.size();

  while (n >= 8) {
    std::uint64_t k;
    std::memcpy(&k, data, 8);  // little-endian layout assumed throughout
    k *= m;
    k ^= k >> r;
    k *= m;
    h ^= k;
    h *= m;
    data += 8;
    n -= 8;
  }

  switch (n) {
    case 7: h ^= static_cast<std::uint64_t>(data[6]) << 48; [[fallthrough]];
    case 6: h ^= static_cast<std::uint64_t>(data[5]) << 40; [[fallthrough]];
    case 5: h ^= static_cast<std::uint64_t>(data[4]) << 32; [[fallthrough]];
    case 4: h ^= static_cast<std::uint64_t>(data[3]) << 24; [[fallthrough]];
    case 3: h ^= static_cast<std::uint64_t>(data[2]) << 16; [[fallthrough]];
    case 2: h ^= static_cast<std::uint64_t>(data[1]) << 8; [[fallthrough]];
    case 1: h ^= static_cast<std::uint64_t>(data[0]); h *= m;
  }

  h ^= h >> r;
  h *= m;
  h ^= h >> r;
  return h;
}

std::uint64_t uniform_hash(std::string_view key, std::uint64_t n_buckets,
                           std::uint64_t seed) {
  return hash64(key, seed) % n_buckets;
}

}  // namespace kipsim

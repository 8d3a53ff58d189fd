#pragma once

#include <cstdint>
#include <initializer_list>

namespace agrimeta {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Order-sensitive combination of a master seed with integer keys.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::int64_t> keys) {
  std::uint64_t h = mix64(master);
  for (auto k : keys) h = mix64(h ^ static_cast<std::uint64_t>(k));
  return h;
}

}  // namespace agrimeta

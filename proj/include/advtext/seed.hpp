#pragma once

#include <cstdint>

namespace advtext {

// Independent RNG stream per (purpose, index).
enum class Stream : std::uint64_t { Shuffle = 1, AdvOrder = 2, Augment = 3, Vocabulary = 4, Documents = 5 };

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(stream)) ^ index);
}

}  // namespace advtext

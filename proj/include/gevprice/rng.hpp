#pragma once

#include <cstdint>
#include <random>

namespace gevprice {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent child seed for (stream, index); streams keep unrelated uses of
/// one base seed apart.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

namespace stream {
inline constexpr std::uint64_t kEvaluation = 0x65766131;
inline constexpr std::uint64_t kCandidates = 0x63616e64;
inline constexpr std::uint64_t kScoring = 0x73636f72;
inline constexpr std::uint64_t kInstance = 0x696e7374;
inline constexpr std::uint64_t kMultistart = 0x6d756c74;
}  // namespace stream

}  // namespace gevprice

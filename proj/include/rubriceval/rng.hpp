#pragma once

#include <cstdint>
#include <string_view>

namespace rubriceval {

// Deterministic 64-bit generator used everywhere randomness must replay
// bit-exactly across platforms (option shuffling, splits, bootstrap
// resampling, permutation tests). std::mt19937_64 would also be portable,
// but splitmix64 is two lines, seedable from any 64-bit value without a
// warmup, and trivially auditable.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform draw in [0, bound). bound must be nonzero. Plain modulo; the
  // bias for bounds this small (option counts, dataset sizes) is far below
  // anything observable, and keeping the mapping primitive makes the
  // sequences easy to reproduce in other languages.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

// FNV-1a over the raw bytes of `text`. Used to fold identifying strings
// into per-call seeds.
inline std::uint64_t fnv1a64(std::string_view text,
                             std::uint64_t basis = 14695981039346656037ULL) {
  std::uint64_t h = basis;
  for (unsigned char byte : text) {
    h ^= static_cast<std::uint64_t>(byte);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace rubriceval

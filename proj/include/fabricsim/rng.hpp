#pragma once

#include <cmath>
#include <cstdint>

namespace fabricsim {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct RunSeed {
  std::uint64_t seed = 1;
};

// Seed of the index-th independent run derived from a base seed.
constexpr RunSeed derive_seed(RunSeed base, std::uint64_t index) {
  return RunSeed{mix64(base.seed + (index + 1) * 0x9E3779B97F4A7C15ULL)};
}

// Counter-based generator: the n-th draw of stream `s` under seed `k` is
// mix64(key(k, s) + n * golden), with key(k, s) = mix64(k ^ mix64(s + golden)).
// Draws are independent of how many other streams exist or the order in
// which they are consumed.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  CounterRng(RunSeed seed, std::uint64_t stream)
      : key_(mix64(seed.seed ^ mix64(stream + kGolden))) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace fabricsim

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "uel/stats.hpp"

namespace uel {

// SplitMix64 finalizer, used to whiten raw seeds and to derive independent
// substreams from (seed, tag, ...) tuples.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed) { return mix64(seed); }

template <class... Tags>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, Tags... rest) {
  return derive_seed(mix64(seed ^ mix64(tag)), rest...);
}

/// Deterministic random stream. Every distribution is built on raw 64-bit
/// draws so that sequences are reproducible bit-for-bit across platforms
/// (the std::*_distribution adapters are implementation-defined and are
/// deliberately not used). Normal deviates come from the inverse-CDF
/// transform of the uniform stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (0, 1); safe as a quantile-transform input.
  double uniform_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_quantile(uniform_open()); }

  // Unbiased integer on [0, n), by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t rem =
        (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;  // 2^64 mod n
    const std::uint64_t bound = std::uint64_t{0} - rem;           // 2^64 - rem
    std::uint64_t x = gen_();
    while (rem != 0 && x >= bound) x = gen_();
    return x % n;
  }

  template <class T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

  // Sorted uniform draw of `s` distinct indices from [0, n).
  std::vector<int> sample_sorted(int n, int s) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < s; ++i) {
      const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(s));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace uel

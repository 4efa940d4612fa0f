#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "havana/types.hpp"

namespace havana {

/// Deterministic random source. mt19937_64 gives an implementation-defined-free
/// bit stream; all value mappings (uniforms, indices, normals) are done by hand
/// here so the same seed yields the same draws on every standard library.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }

  /// Uniform in [0, 1), 53-bit resolution.
  Scalar uniform() {
    return static_cast<Scalar>(next_u64() >> 11) * 0x1.0p-53;
  }

  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n). Rejection on the partial top bucket.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) {
      throw std::invalid_argument("uniform_index: n must be positive");
    }
    const std::uint64_t reject =
        (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;  // 2^64 mod n
    std::uint64_t x = next_u64();
    while (x < reject) {
      x = next_u64();
    }
    return static_cast<std::size_t>(x % n);
  }

  /// Standard normal via Box-Muller; two draws per call, no cached state.
  Scalar normal() {
    const Scalar u1 =
        (static_cast<Scalar>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const Scalar u2 = static_cast<Scalar>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// First m entries of a uniform random permutation of {0, ..., n-1}.
  std::vector<int> sample_without_replacement(int n, int m) {
    if (n < 0 || m < 0 || m > n) {
      throw std::invalid_argument("sample_without_replacement: need 0 <= m <= n");
    }
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int t = 0; t < m; ++t) {
      const std::size_t j =
          static_cast<std::size_t>(t) +
          uniform_index(static_cast<std::size_t>(n - t));
      std::swap(pool[static_cast<std::size_t>(t)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(m));
    return pool;
  }

  /// Independent derived stream (seeded from this one).
  Rng child() { return Rng(next_u64()); }

  std::uint64_t draw_count() const { return draws_; }

private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace havana

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace qprec::rng {

/// Named substreams. Every consumer of randomness (channel draw, receiver
/// noise, data symbols, ...) pulls from its own stream keyed by
/// (master seed, stream id, indices), so Monte-Carlo blocks reproduce
/// bit-identically no matter in which order or on how many threads they run.
enum class Stream : std::uint64_t {
  Channel = 1,
  Noise = 2,
  Data = 3,
  Csi = 4,
  Pilot = 5,
  Schedule = 6,
  User = 7,
};

/// splitmix64 finalizer; used to mix seed components into a stream seed.
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return mix(mix(a) ^ b); }

/// Deterministic random substream. Uniform and Gaussian draws are generated
/// from raw engine output with fixed algorithms (no std::*_distribution), so
/// sequences are identical across standard library implementations.
class Substream {
 public:
  Substream(std::uint64_t master, Stream stream, std::uint64_t i0 = 0, std::uint64_t i1 = 0)
      : eng_(mix(mix(mix(master, static_cast<std::uint64_t>(stream)), i0), i1)) {}

  explicit Substream(std::uint64_t raw_seed) : eng_(mix(raw_seed, 0)) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Circularly-symmetric complex Gaussian CN(0, 1) via Box-Muller.
  std::complex<double> gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

  /// k distinct indices drawn uniformly from 0..n-1, returned sorted.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 eng_;
};

inline std::vector<int> Substream::sample_without_replacement(int n, int k) {
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace qprec::rng

// SPDX-License-Identifier: Apache-2.0
#include "qprec/dft.hpp"

#include <cmath>
#include <stdexcept>

namespace qprec {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  // bit-reversal reorder
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace

void dft_direct_inplace(std::vector<std::complex<double>>& buf, bool inverse) {
  const std::size_t n = buf.size();
  if (n == 0) return;
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<std::complex<double>> tw(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ang = sign * 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    tw[k] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<std::complex<double>> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) acc += buf[t] * tw[(m * t) % n];
    out[m] = acc;
  }
  buf.swap(out);
}

void dft_inplace(std::vector<std::complex<double>>& buf, bool inverse) {
  if (buf.empty()) throw std::invalid_argument("dft: empty buffer");
  if (is_power_of_two(buf.size()))
    fft_radix2(buf, inverse);
  else
    dft_direct_inplace(buf, inverse);
}

std::uint64_t dft_mult_count(std::size_t n) {
  if (n == 0) return 0;
  if (is_power_of_two(n)) {
    std::uint64_t log2n = 0;
    for (std::size_t m = n; m > 1; m >>= 1) ++log2n;
    return 4ull * (n / 2) * log2n;  // one complex multiply per butterfly
  }
  return 4ull * n * n;
}

}  // namespace qprec

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace qprec {

/// Unscaled discrete Fourier transform of buf, in place.
/// Forward (inverse = false): X[m] = sum_t x[t] exp(-j 2 pi m t / N).
/// Inverse direction (inverse = true) uses exp(+j ...); no 1/N factor is
/// applied in either direction, callers own the scaling convention.
/// Radix-2 FFT when N is a power of two, direct O(N^2) transform otherwise.
void dft_inplace(std::vector<std::complex<double>>& buf, bool inverse);

/// Direct O(N^2) transform regardless of size (the FFT cross-check path).
void dft_direct_inplace(std::vector<std::complex<double>>& buf, bool inverse);

bool is_power_of_two(std::size_t n);

/// Real-multiplication count charged for one length-n transform, matching
/// whichever path dft_inplace takes.
std::uint64_t dft_mult_count(std::size_t n);

}  // namespace qprec

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "qprec/rng.hpp"
#include "qprec/types.hpp"

namespace qprec {

/// Finite modulation alphabet with unit average energy and zero mean.
/// Known names: qpsk, 4psk, 8psk, 16psk, 32psk, 16qam, 64qam.
struct Constellation {
  std::string label;
  std::vector<cxd> points;

  static Constellation named(const std::string& name);

  int size() const { return static_cast<int>(points.size()); }
  double bits() const;  ///< log2 of the alphabet size
};

/// One OFDM block: frequency grid (K x T_F) plus its cyclic-prefixed
/// time-domain image (K x T with T = T_F + T_c). Layout is prefix first:
/// time columns [0, T_c) repeat columns [T_F, T).
struct OfdmFrame {
  MatrixXcd freq;  // K x T_F
  MatrixXcd time;  // K x (T_F + T_c)
  int t_f = 0;
  int t_c = 0;

  int n_ue() const { return static_cast<int>(freq.rows()); }
  int block_len() const { return t_f + t_c; }
};

/// i.i.d. uniform symbols from the constellation, K x T_F.
MatrixXcd draw_data(const Constellation& c, int n_ue, int t_f, rng::Substream& rs);
MatrixXcd draw_data(const Constellation& c, int n_ue, int t_f, std::uint64_t seed);

/// Row-wise IDFT with 1/T_F scaling plus cyclic prefix of length t_c.
MatrixXcd to_time(const MatrixXcd& freq, int t_c);

/// Drops the first t_c samples and applies the unscaled row-wise DFT over the
/// next t_f samples.
MatrixXcd from_time(const MatrixXcd& time, int t_f, int t_c);

OfdmFrame make_frame(MatrixXcd freq, int t_c);

}  // namespace qprec

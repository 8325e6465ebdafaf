// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qprec/rng.hpp"
#include "qprec/types.hpp"

namespace qprec {

/// Discrete-time multipath MIMO channel: L tap matrices of size K x N
/// (UEs x transmit antennas). Immutable after construction.
struct TapChannel {
  std::vector<MatrixXcd> taps;  // taps[tau], tau = 0..L-1

  int n_ue() const { return taps.empty() ? 0 : static_cast<int>(taps[0].rows()); }
  int n_tx() const { return taps.empty() ? 0 : static_cast<int>(taps[0].cols()); }
  int n_taps() const { return static_cast<int>(taps.size()); }
};

/// Per-subcarrier frequency response: T_F matrices of size K x N.
struct FreqChannel {
  std::vector<MatrixXcd> per_subcarrier;

  int n_subcarriers() const { return static_cast<int>(per_subcarrier.size()); }
  int n_ue() const {
    return per_subcarrier.empty() ? 0 : static_cast<int>(per_subcarrier[0].rows());
  }
  int n_tx() const {
    return per_subcarrier.empty() ? 0 : static_cast<int>(per_subcarrier[0].cols());
  }
};

/// Receiver noise: circularly-symmetric complex Gaussian, per antenna per
/// symbol, with its own seed.
struct NoiseSpec {
  double variance = 0.0;
  std::uint64_t seed = 0;
};

/// Pluggable tap generator so non-Rayleigh profiles or externally produced
/// taps can be substituted for the built-in model.
using TapGenerator = std::function<TapChannel(int n_tx, int n_ue, int n_taps, rng::Substream&)>;

/// i.i.d. Rayleigh taps with uniform power delay profile: each entry of each
/// tap is CN(0, 1/L).
TapChannel draw_rayleigh(int n_tx, int n_ue, int n_taps, rng::Substream& rs);
TapChannel draw_rayleigh(int n_tx, int n_ue, int n_taps, std::uint64_t seed);

/// Length-t_f DFT of the zero-padded tap sequences, per (UE, antenna) pair.
FreqChannel frequency_response(const TapChannel& ch, int t_f);

/// Channel knowledge handed to the precoder under CSI error epsilon in [0,1].
/// The returned estimate Ht satisfies H = sqrt(1-eps^2) Ht + eps Z with Z
/// i.i.d. CN(0, 1/L) independent of Ht, so Ht keeps per-entry variance 1/L.
/// eps = 0 returns the channel unchanged; eps = 1 returns an independent draw.
TapChannel corrupt_csi(const TapChannel& ch, double epsilon, rng::Substream& rs);
TapChannel corrupt_csi(const TapChannel& ch, double epsilon, std::uint64_t seed);

/// y[t] = sum_tau H[tau] x[t-tau] + z[t] with zero pre-block history
/// (x[t] = 0 for t < 0). x is N x T, the result is K x T.
MatrixXcd apply_channel(const TapChannel& ch, const MatrixXcd& x, double variance,
                        rng::Substream& rs);
MatrixXcd apply_channel(const TapChannel& ch, const MatrixXcd& x, const NoiseSpec& noise);

/// Noiseless convolution sum_tau H[tau] x[t-tau]; shared by apply_channel and
/// the precoder cost evaluation.
MatrixXcd convolve(const TapChannel& ch, const MatrixXcd& x);

/// Text tap file: "qprec-taps 1" header, "K N L" dimensions, then one
/// "re im" pair per line in row-major (tau, k, n) order.
void save_taps(const std::string& path, const TapChannel& ch);
TapChannel load_taps(const std::string& path);

}  // namespace qprec

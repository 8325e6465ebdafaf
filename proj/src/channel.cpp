// SPDX-License-Identifier: Apache-2.0
#include "qprec/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qprec/dft.hpp"

namespace qprec {

TapChannel draw_rayleigh(int n_tx, int n_ue, int n_taps, rng::Substream& rs) {
  if (n_tx < 1 || n_ue < 1 || n_taps < 1)
    throw std::invalid_argument("draw_rayleigh: dimensions must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_taps));
  TapChannel ch;
  ch.taps.reserve(n_taps);
  for (int tau = 0; tau < n_taps; ++tau) {
    MatrixXcd h(n_ue, n_tx);
    for (int k = 0; k < n_ue; ++k)
      for (int n = 0; n < n_tx; ++n) h(k, n) = scale * rs.gaussian();
    ch.taps.push_back(std::move(h));
  }
  return ch;
}

TapChannel draw_rayleigh(int n_tx, int n_ue, int n_taps, std::uint64_t seed) {
  rng::Substream rs(seed, rng::Stream::Channel);
  return draw_rayleigh(n_tx, n_ue, n_taps, rs);
}

FreqChannel frequency_response(const TapChannel& ch, int t_f) {
  const int L = ch.n_taps();
  if (L < 1) throw std::invalid_argument("frequency_response: empty channel");
  if (t_f < L) throw std::invalid_argument("frequency_response: t_f must be >= n_taps");
  const int K = ch.n_ue();
  const int N = ch.n_tx();
  FreqChannel fc;
  fc.per_subcarrier.assign(t_f, MatrixXcd::Zero(K, N));
  // DFT the zero-padded tap sequence for each (k, n) pair
  std::vector<cxd> buf(t_f);
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < N; ++n) {
      std::fill(buf.begin(), buf.end(), cxd(0.0, 0.0));
      for (int tau = 0; tau < L; ++tau) buf[tau] = ch.taps[tau](k, n);
      dft_inplace(buf, false);
      for (int m = 0; m < t_f; ++m) fc.per_subcarrier[m](k, n) = buf[m];
    }
  }
  return fc;
}

TapChannel corrupt_csi(const TapChannel& ch, double epsilon, rng::Substream& rs) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("corrupt_csi: epsilon must be in [0, 1]");
  if (epsilon == 0.0) return ch;
  const int L = ch.n_taps();
  const double keep = std::sqrt(1.0 - epsilon * epsilon);
  const double tap_scale = 1.0 / std::sqrt(static_cast<double>(L));
  TapChannel est;
  est.taps.reserve(L);
  for (int tau = 0; tau < L; ++tau) {
    MatrixXcd h = keep * ch.taps[tau];
    for (int k = 0; k < h.rows(); ++k)
      for (int n = 0; n < h.cols(); ++n) h(k, n) += epsilon * tap_scale * rs.gaussian();
    est.taps.push_back(std::move(h));
  }
  return est;
}

TapChannel corrupt_csi(const TapChannel& ch, double epsilon, std::uint64_t seed) {
  rng::Substream rs(seed, rng::Stream::Csi);
  return corrupt_csi(ch, epsilon, rs);
}

MatrixXcd convolve(const TapChannel& ch, const MatrixXcd& x) {
  const int L = ch.n_taps();
  if (L < 1) throw std::invalid_argument("convolve: empty channel");
  if (x.rows() != ch.n_tx())
    throw std::invalid_argument("convolve: transmit dimension mismatch");
  const int T = static_cast<int>(x.cols());
  MatrixXcd y = MatrixXcd::Zero(ch.n_ue(), T);
  for (int t = 0; t < T; ++t)
    for (int tau = 0; tau <= std::min(L - 1, t); ++tau)
      y.col(t).noalias() += ch.taps[tau] * x.col(t - tau);
  return y;
}

MatrixXcd apply_channel(const TapChannel& ch, const MatrixXcd& x, double variance,
                        rng::Substream& rs) {
  if (variance < 0.0) throw std::invalid_argument("apply_channel: negative noise variance");
  MatrixXcd y = convolve(ch, x);
  if (variance > 0.0) {
    const double sigma = std::sqrt(variance);
    for (int t = 0; t < y.cols(); ++t)
      for (int k = 0; k < y.rows(); ++k) y(k, t) += sigma * rs.gaussian();
  }
  return y;
}

MatrixXcd apply_channel(const TapChannel& ch, const MatrixXcd& x, const NoiseSpec& noise) {
  rng::Substream rs(noise.seed, rng::Stream::Noise);
  return apply_channel(ch, x, noise.variance, rs);
}

void save_taps(const std::string& path, const TapChannel& ch) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_taps: cannot open " + path);
  f << "qprec-taps 1\n";
  f << ch.n_ue() << " " << ch.n_tx() << " " << ch.n_taps() << "\n";
  char line[64];
  for (const auto& tap : ch.taps)
    for (int k = 0; k < tap.rows(); ++k)
      for (int n = 0; n < tap.cols(); ++n) {
        std::snprintf(line, sizeof(line), "%.17g %.17g\n", tap(k, n).real(), tap(k, n).imag());
        f << line;
      }
  if (!f) throw std::runtime_error("save_taps: write failed for " + path);
}

TapChannel load_taps(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_taps: cannot open " + path);
  std::string magic;
  int version = 0;
  f >> magic >> version;
  if (magic != "qprec-taps" || version != 1)
    throw std::runtime_error("load_taps: not a qprec-taps v1 file: " + path);
  int K = 0, N = 0, L = 0;
  f >> K >> N >> L;
  if (!f || K < 1 || N < 1 || L < 1)
    throw std::runtime_error("load_taps: bad dimensions in " + path);
  TapChannel ch;
  ch.taps.assign(L, MatrixXcd::Zero(K, N));
  for (int tau = 0; tau < L; ++tau)
    for (int k = 0; k < K; ++k)
      for (int n = 0; n < N; ++n) {
        double re = 0.0, im = 0.0;
        f >> re >> im;
        if (!f) throw std::runtime_error("load_taps: truncated tap data in " + path);
        ch.taps[tau](k, n) = cxd(re, im);
      }
  return ch;
}

}  // namespace qprec

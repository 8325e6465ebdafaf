// SPDX-License-Identifier: Apache-2.0
#include "qprec/ofdm.hpp"

#include <cmath>
#include <stdexcept>

#include "qprec/dft.hpp"

namespace qprec {

namespace {

// Gray-ordered one-dimensional PAM levels for square QAM.
std::vector<double> pam_levels(int m) {
  // m = 4: -3 -1 1 3 visited in Gray order 00,01,11,10 -> -3 -1 3 1
  std::vector<double> levels;
  if (m == 2) {
    levels = {-1.0, 1.0};
  } else if (m == 4) {
    levels = {-3.0, -1.0, 3.0, 1.0};
  } else if (m == 8) {
    levels = {-7.0, -5.0, -1.0, -3.0, 5.0, 7.0, 3.0, 1.0};
  } else {
    throw std::invalid_argument("pam_levels: unsupported order");
  }
  return levels;
}

Constellation square_qam(int order, const std::string& label) {
  int side = 0;
  while (side * side < order) ++side;
  if (side * side != order) throw std::invalid_argument("square_qam: order not a square");
  const auto levels = pam_levels(side);
  double energy = 0.0;
  for (double a : levels) energy += a * a;
  energy /= static_cast<double>(side);  // per dimension
  const double scale = 1.0 / std::sqrt(2.0 * energy);
  Constellation c;
  c.label = label;
  c.points.reserve(order);
  for (double re : levels)
    for (double im : levels) c.points.emplace_back(scale * re, scale * im);
  return c;
}

Constellation psk(int order, const std::string& label, double phase_offset) {
  Constellation c;
  c.label = label;
  c.points.reserve(order);
  // Gray order around the circle: index g = q ^ (q >> 1)
  for (int q = 0; q < order; ++q) {
    const int g = q ^ (q >> 1);
    const double ang = 2.0 * M_PI * static_cast<double>(g) / order + phase_offset;
    c.points.emplace_back(std::cos(ang), std::sin(ang));
  }
  return c;
}

}  // namespace

Constellation Constellation::named(const std::string& name) {
  if (name == "qpsk") return psk(4, name, M_PI / 4.0);  // (+-1 +-j)/sqrt(2)
  if (name == "4psk") return psk(4, name, 0.0);
  if (name == "8psk") return psk(8, name, 0.0);
  if (name == "16psk") return psk(16, name, 0.0);
  if (name == "32psk") return psk(32, name, 0.0);
  if (name == "16qam") return square_qam(16, name);
  if (name == "64qam") return square_qam(64, name);
  throw std::invalid_argument("Constellation::named: unknown constellation '" + name + "'");
}

double Constellation::bits() const { return std::log2(static_cast<double>(points.size())); }

MatrixXcd draw_data(const Constellation& c, int n_ue, int t_f, rng::Substream& rs) {
  if (n_ue < 1 || t_f < 1) throw std::invalid_argument("draw_data: dimensions must be >= 1");
  if (c.points.empty()) throw std::invalid_argument("draw_data: empty constellation");
  MatrixXcd grid(n_ue, t_f);
  const auto m = static_cast<std::uint64_t>(c.points.size());
  for (int k = 0; k < n_ue; ++k)
    for (int t = 0; t < t_f; ++t) grid(k, t) = c.points[rs.below(m)];
  return grid;
}

MatrixXcd draw_data(const Constellation& c, int n_ue, int t_f, std::uint64_t seed) {
  rng::Substream rs(seed, rng::Stream::Data);
  return draw_data(c, n_ue, t_f, rs);
}

MatrixXcd to_time(const MatrixXcd& freq, int t_c) {
  if (t_c < 0) throw std::invalid_argument("to_time: t_c must be >= 0");
  const int K = static_cast<int>(freq.rows());
  const int t_f = static_cast<int>(freq.cols());
  MatrixXcd out(K, t_f + t_c);
  std::vector<cxd> buf(t_f);
  const double scale = 1.0 / static_cast<double>(t_f);
  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < t_f; ++m) buf[m] = freq(k, m);
    dft_inplace(buf, true);
    for (int t = 0; t < t_f; ++t) out(k, t_c + t) = scale * buf[t];
  }
  // prefix copies the tail of the core
  for (int t = 0; t < t_c; ++t) out.col(t) = out.col(t + t_f);
  return out;
}

MatrixXcd from_time(const MatrixXcd& time, int t_f, int t_c) {
  if (t_f < 1 || t_c < 0) throw std::invalid_argument("from_time: bad dimensions");
  if (time.cols() < t_f + t_c)
    throw std::invalid_argument("from_time: input shorter than t_c + t_f");
  const int K = static_cast<int>(time.rows());
  MatrixXcd out(K, t_f);
  std::vector<cxd> buf(t_f);
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t < t_f; ++t) buf[t] = time(k, t_c + t);
    dft_inplace(buf, false);
    for (int m = 0; m < t_f; ++m) out(k, m) = buf[m];
  }
  return out;
}

OfdmFrame make_frame(MatrixXcd freq, int t_c) {
  OfdmFrame frame;
  frame.t_f = static_cast<int>(freq.cols());
  frame.t_c = t_c;
  frame.time = to_time(freq, t_c);
  frame.freq = std::move(freq);
  return frame;
}

}  // namespace qprec

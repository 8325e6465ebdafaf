// SPDX-License-Identifier: Apache-2.0
#include "qprec/precode.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qprec/dft.hpp"

namespace qprec {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Real multiplications charged for one zero-history convolution H * x over a
// length-T block: one K x N matrix-vector product per (tap, slot) pair.
std::uint64_t convolution_mults(int n_ue, int n_tx, int n_taps, int block_len) {
  std::uint64_t pairs = 0;
  for (int tau = 0; tau < n_taps; ++tau)
    pairs += static_cast<std::uint64_t>(block_len > tau ? block_len - tau : 0);
  return 4ULL * n_ue * n_tx * pairs;
}

void check_block_shapes(const MatrixXcd& x, const TapChannel& ch, const MatrixXcd& target) {
  if (x.rows() != ch.n_tx())
    throw std::invalid_argument("transmit block has " + std::to_string(x.rows()) +
                                " rows, channel expects " + std::to_string(ch.n_tx()));
  if (target.rows() != ch.n_ue())
    throw std::invalid_argument("target has " + std::to_string(target.rows()) +
                                " rows, channel serves " + std::to_string(ch.n_ue()) + " UEs");
  if (target.cols() != x.cols())
    throw std::invalid_argument("target and transmit block lengths differ");
}

}  // namespace

TxAlphabet TxAlphabet::make(double power_budget, int n_tx, int phase_bits) {
  if (!(power_budget > 0.0)) throw std::invalid_argument("power budget must be positive");
  if (n_tx < 1) throw std::invalid_argument("antenna count must be at least 1");
  if (phase_bits < 1 || phase_bits > 16)
    throw std::invalid_argument("phase bits must be in 1..16");
  TxAlphabet a;
  a.power_budget = power_budget;
  a.n_tx = n_tx;
  a.phase_bits = phase_bits;
  const int m = 1 << phase_bits;
  const double amp = std::sqrt(power_budget / n_tx);
  a.points.reserve(m + 1);
  a.points.push_back(cxd(0.0, 0.0));
  for (int q = 0; q < m; ++q) {
    const double phi = 2.0 * M_PI * q / m;
    a.points.emplace_back(amp * std::cos(phi), amp * std::sin(phi));
  }
  return a;
}

double TxAlphabet::amplitude() const { return std::sqrt(power_budget / n_tx); }

int nearest_point_index(cxd v, const TxAlphabet& alphabet) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < alphabet.size(); ++i) {
    const cxd d = v - alphabet.points[i];
    const double dist = d.real() * d.real() + d.imag() * d.imag();
    if (dist < best_d) {
      best_d = dist;
      best = i;
    }
  }
  return best;
}

MatrixXcd quantize(const MatrixXcd& x, const TxAlphabet& alphabet, std::uint64_t* tally) {
  MatrixXcd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      out(i, j) = alphabet.points[nearest_point_index(x(i, j), alphabet)];
  if (tally)
    *tally += 2ULL * alphabet.size() * static_cast<std::uint64_t>(x.size());
  return out;
}

double cost_g(const MatrixXcd& x, double alpha, const TapChannel& ch,
              const MatrixXcd& target, double noise_var) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  if (noise_var < 0.0) throw std::invalid_argument("noise variance must be nonnegative");
  check_block_shapes(x, ch, target);
  const MatrixXcd v = convolve(ch, x);
  const double t_slots = static_cast<double>(x.cols());
  return (target - alpha * v).squaredNorm() +
         alpha * alpha * t_slots * ch.n_ue() * noise_var;
}

double optimal_alpha(const MatrixXcd& x, const TapChannel& ch, const MatrixXcd& target,
                     double noise_var) {
  if (noise_var < 0.0) throw std::invalid_argument("noise variance must be nonnegative");
  check_block_shapes(x, ch, target);
  const MatrixXcd v = convolve(ch, x);
  const double num = target.conjugate().cwiseProduct(v).real().sum();
  const double den =
      v.squaredNorm() + static_cast<double>(x.cols()) * ch.n_ue() * noise_var;
  if (!(den > 0.0))
    throw std::invalid_argument(
        "alpha is undefined: zero transmit energy and zero noise");
  return std::max(0.0, num / den);
}

std::vector<MatrixXcd> lmmse_weights(const FreqChannel& freq_ch, double symbol_power,
                                     double noise_var, std::uint64_t* tally) {
  if (!(symbol_power > 0.0)) throw std::invalid_argument("symbol power must be positive");
  if (noise_var < 0.0) throw std::invalid_argument("noise variance must be nonnegative");
  const int n_sub = freq_ch.n_subcarriers();
  if (n_sub == 0) throw std::invalid_argument("empty frequency response");
  const std::uint64_t k = freq_ch.n_ue();
  const std::uint64_t n = freq_ch.n_tx();
  std::vector<MatrixXcd> weights(n_sub);
  for (int m = 0; m < n_sub; ++m) {
    const MatrixXcd& h = freq_ch.per_subcarrier[m];
    MatrixXcd gram = symbol_power * (h * h.adjoint());
    gram.diagonal().array() += noise_var;
    Eigen::LLT<MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success) {
      if (noise_var == 0.0)
        throw std::runtime_error("ZF infeasible: rank-deficient channel at subcarrier " +
                                 std::to_string(m));
      throw std::runtime_error("LMMSE solve failed at subcarrier " + std::to_string(m));
    }
    // W = P H^H (P H H^H + noise I)^{-1}; the inverse is Hermitian, so solve
    // against P H and take the adjoint.
    weights[m] = llt.solve(symbol_power * h).adjoint();
  }
  if (tally)
    *tally += static_cast<std::uint64_t>(n_sub) *
              (8 * k * k * n + 2 * k * k + 2 * k * n + (4 * k * k * k) / 3);
  return weights;
}

PrecodeResult linear_precode(const MatrixXcd& freq_data,
                             const std::vector<MatrixXcd>& weights, int t_c,
                             double power_budget) {
  const int n_ue = static_cast<int>(freq_data.rows());
  const int t_f = static_cast<int>(freq_data.cols());
  if (t_c < 0) throw std::invalid_argument("cyclic prefix length must be nonnegative");
  if (!(power_budget > 0.0)) throw std::invalid_argument("power budget must be positive");
  if (static_cast<int>(weights.size()) != t_f)
    throw std::invalid_argument("need one weight matrix per subcarrier");
  const int n_tx = static_cast<int>(weights[0].rows());
  for (const MatrixXcd& w : weights)
    if (w.rows() != n_tx || w.cols() != n_ue)
      throw std::invalid_argument("weight matrices must all be N x K");

  PrecodeResult res;
  MatrixXcd xf(n_tx, t_f);
  for (int m = 0; m < t_f; ++m) xf.col(m) = weights[m] * freq_data.col(m);
  res.x = to_time(xf, t_c);

  const double t_slots = static_cast<double>(res.x.cols());
  const double energy = res.x.squaredNorm();
  if (!(energy > 0.0))
    throw std::invalid_argument("linear precoder output has zero energy");
  const double scale = std::sqrt(power_budget * t_slots / energy);
  res.x *= scale;
  res.alpha = 1.0 / scale;
  res.cost = kNan;
  res.iterations = 1;
  res.ops.apply = 4ULL * n_tx * n_ue * t_f                       // per-subcarrier W u
                  + n_tx * dft_mult_count(t_f) + 2ULL * n_tx * t_f  // IDFTs + 1/T_F
                  + 4ULL * res.x.size() + 2;                     // energy + rescale
  return res;
}

CoordState::CoordState(const TapChannel& ch, const MatrixXcd& target,
                       const TxAlphabet& alphabet, double noise_var, MatrixXcd x_init,
                       double alpha_init)
    : ch_(ch),
      target_(target),
      alphabet_(alphabet),
      noise_var_(noise_var),
      x_(std::move(x_init)) {
  if (noise_var < 0.0) throw std::invalid_argument("noise variance must be nonnegative");
  if (alphabet.n_tx != ch.n_tx())
    throw std::invalid_argument("alphabet normalization does not match antenna count");
  check_block_shapes(x_, ch_, target_);

  const int n_ue = ch_.n_ue();
  const int n_tx = ch_.n_tx();
  const int n_taps = ch_.n_taps();
  const int t_slots = static_cast<int>(x_.cols());

  v_ = convolve(ch_, x_);
  ops_.init += convolution_mults(n_ue, n_tx, n_taps, t_slots);

  col_energy_.assign(static_cast<std::size_t>(n_tx) * (n_taps + 1), 0.0);
  for (int n = 0; n < n_tx; ++n) {
    double acc = 0.0;
    col_energy_[static_cast<std::size_t>(n) * (n_taps + 1)] = 0.0;
    for (int tau = 0; tau < n_taps; ++tau) {
      acc += ch_.taps[tau].col(n).squaredNorm();
      col_energy_[static_cast<std::size_t>(n) * (n_taps + 1) + tau + 1] = acc;
    }
  }
  ops_.init += 2ULL * n_ue * n_tx * n_taps;

  if (alpha_init > 0.0) {
    alpha_ = alpha_init;
  } else {
    // Closed-form alpha for the initial block; fall back to 1 in the
    // degenerate cases (zero or anti-correlated initialization) so the
    // descent has a nonzero scaling to work against.
    const double num = target_.conjugate().cwiseProduct(v_).real().sum();
    const double den =
        v_.squaredNorm() + static_cast<double>(t_slots) * n_ue * noise_var_;
    alpha_ = (den > 0.0 && num > 0.0) ? num / den : 1.0;
    ops_.init += 4ULL * n_ue * t_slots + 1;
  }

  r_ = target_ - alpha_ * v_;
  cost_ = r_.squaredNorm() +
          alpha_ * alpha_ * static_cast<double>(t_slots) * n_ue * noise_var_;
  ops_.init += 4ULL * n_ue * t_slots + 3;
}

CoordState::Candidate CoordState::probe(int slot, int antenna) {
  const int n_taps = ch_.n_taps();
  const int t_slots = static_cast<int>(x_.cols());
  const int window = std::min(n_taps, t_slots - slot);

  cxd corr(0.0, 0.0);
  for (int tau = 0; tau < window; ++tau)
    corr += ch_.taps[tau].col(antenna).dot(r_.col(slot + tau));
  ops_.iter += 4ULL * ch_.n_ue() * window;

  const double tap_energy =
      col_energy_[static_cast<std::size_t>(antenna) * (n_taps + 1) + window];
  const double a = alpha_;
  const double a2 = a * a;
  const cxd cur = x_(antenna, slot);

  Candidate best{0, std::numeric_limits<double>::infinity(), cxd(0.0, 0.0)};
  for (int i = 0; i < alphabet_.size(); ++i) {
    const cxd d = alphabet_.points[i] - cur;
    const double delta = -2.0 * a * (d.real() * corr.real() + d.imag() * corr.imag()) +
                         a2 * (d.real() * d.real() + d.imag() * d.imag()) * tap_energy;
    if (delta < best.delta) best = Candidate{i, delta, d};
  }
  ops_.iter += 7ULL * alphabet_.size() + 1;
  return best;
}

std::pair<int, double> CoordState::best_candidate(int slot, int antenna) {
  const Candidate c = probe(slot, antenna);
  return {c.index, c.delta};
}

std::pair<int, double> CoordState::coordinate_update(int slot, int antenna) {
  const int n_taps = ch_.n_taps();
  const int t_slots = static_cast<int>(x_.cols());
  const Candidate c = probe(slot, antenna);

  int chosen;
  if (c.delta < 0.0) {  // strict improvement only, so equal-cost symbols never oscillate
    const int window = std::min(n_taps, t_slots - slot);
    const cxd d = c.diff;
    const cxd f = alpha_ * d;
    for (int tau = 0; tau < window; ++tau) {
      const auto col = ch_.taps[tau].col(antenna);
      v_.col(slot + tau) += d * col;
      r_.col(slot + tau) -= f * col;
    }
    ops_.iter += 8ULL * ch_.n_ue() * window + 2;
    x_(antenna, slot) = alphabet_.points[c.index];
    cost_ += c.delta;
    chosen = c.index;
  } else {
    chosen = 0;
    for (int i = 0; i < alphabet_.size(); ++i)
      if (x_(antenna, slot) == alphabet_.points[i]) {
        chosen = i;
        break;
      }
  }
  emit(UpdateEvent::Kind::Coordinate, slot, antenna);
  return {chosen, cost_};
}

void CoordState::reoptimize_alpha() {
  const int n_ue = ch_.n_ue();
  const int t_slots = static_cast<int>(x_.cols());
  double num = 0.0;
  double den = 0.0;
  const cxd* u = target_.data();
  const cxd* v = v_.data();
  const Eigen::Index total = target_.size();
  for (Eigen::Index i = 0; i < total; ++i) {
    num += u[i].real() * v[i].real() + u[i].imag() * v[i].imag();
    den += v[i].real() * v[i].real() + v[i].imag() * v[i].imag();
  }
  const double den_total = den + static_cast<double>(t_slots) * n_ue * noise_var_;
  if (den_total > 0.0) {
    alpha_ = std::max(0.0, num / den_total);
    r_ = target_ - alpha_ * v_;
    cost_ = r_.squaredNorm() +
            alpha_ * alpha_ * static_cast<double>(t_slots) * n_ue * noise_var_;
  }
  ops_.iter += 8ULL * n_ue * t_slots + 6;
  emit(UpdateEvent::Kind::Alpha, -1, -1);
}

void CoordState::emit(UpdateEvent::Kind kind, int slot, int antenna) {
  if (observer) observer(UpdateEvent{kind, iteration, slot, antenna, cost_, alpha_, x_});
}

MatrixXcd matched_filter_init(const OfdmFrame& frame, const TapChannel& ch,
                              const TxAlphabet& alphabet, const FreqChannel* freq,
                              OpCounter* ops) {
  const int n_ue = ch.n_ue();
  const int n_tx = ch.n_tx();
  const int t_f = frame.t_f;
  if (frame.freq.rows() != n_ue)
    throw std::invalid_argument("frame and channel disagree on the UE count");

  FreqChannel local;
  if (!freq) {
    local = frequency_response(ch, t_f);
    freq = &local;
    if (ops) ops->init += static_cast<std::uint64_t>(n_ue) * n_tx * dft_mult_count(t_f);
  }
  if (freq->n_subcarriers() != t_f || freq->n_tx() != n_tx || freq->n_ue() != n_ue)
    throw std::invalid_argument("frequency response does not match frame/channel");

  MatrixXcd xf(n_tx, t_f);
  for (int m = 0; m < t_f; ++m)
    xf.col(m) = freq->per_subcarrier[m].adjoint() * frame.freq.col(m);

  MatrixXcd x = to_time(xf, frame.t_c);
  const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
  if (!(rms > 0.0))
    throw std::invalid_argument("matched filter is identically zero (zero-energy target)");
  x *= alphabet.amplitude() / rms;

  std::uint64_t qtally = 0;
  MatrixXcd xq = quantize(x, alphabet, &qtally);
  if (ops) {
    ops->init += 4ULL * n_tx * n_ue * t_f                           // H^H u per subcarrier
                 + n_tx * dft_mult_count(t_f) + 2ULL * n_tx * t_f   // IDFTs + 1/T_F
                 + 4ULL * x.size() + 1                              // RMS + rescale
                 + qtally;
  }
  return xq;
}

namespace {

PrecodeResult run_descent(const OfdmFrame& frame, const TapChannel& ch,
                          const TxAlphabet& alphabet, int iters, double noise_var,
                          bool greedy, Schedule schedule, rng::Substream* schedule_rng,
                          const FreqChannel* freq, const UpdateObserver& observer) {
  if (iters < 1) throw std::invalid_argument("iteration count must be at least 1");
  if (frame.t_f < ch.n_taps() || frame.t_c < ch.n_taps() - 1)
    throw std::invalid_argument("frame too short for the channel delay spread");

  OpCounter init_ops;
  MatrixXcd x0 = matched_filter_init(frame, ch, alphabet, freq, &init_ops);

  CoordState st(ch, frame.time, alphabet, noise_var, std::move(x0), 0.0);
  st.ops() += init_ops;
  st.observer = observer;

  const int t_slots = frame.block_len();
  const int n_tx = ch.n_tx();
  std::vector<char> remaining;
  for (int i = 0; i < iters; ++i) {
    st.iteration = i;
    for (int t = 0; t < t_slots; ++t) {
      if (greedy) {
        remaining.assign(n_tx, 1);
        for (int round = 0; round < n_tx; ++round) {
          int best_n = -1;
          double best_delta = std::numeric_limits<double>::infinity();
          for (int n = 0; n < n_tx; ++n) {
            if (!remaining[n]) continue;
            const double delta = st.best_candidate(t, n).second;
            if (delta < best_delta) {
              best_delta = delta;
              best_n = n;
            }
          }
          st.coordinate_update(t, best_n);
          remaining[best_n] = 0;
        }
      } else if (schedule == Schedule::RandomPermutation) {
        for (int n : schedule_rng->permutation(n_tx)) st.coordinate_update(t, n);
      } else {
        for (int n = 0; n < n_tx; ++n) st.coordinate_update(t, n);
      }
    }
    st.reoptimize_alpha();
  }

  PrecodeResult res;
  res.x = st.x();
  res.alpha = st.alpha();
  res.cost = st.cost();
  res.iterations = iters;
  res.ops = st.ops();
  return res;
}

}  // namespace

PrecodeResult precode_magiq(const OfdmFrame& frame, const TapChannel& ch,
                            const TxAlphabet& alphabet, int iters, double noise_var,
                            const FreqChannel* freq, const UpdateObserver& observer) {
  return run_descent(frame, ch, alphabet, iters, noise_var, /*greedy=*/true,
                     Schedule::RoundRobin, nullptr, freq, observer);
}

PrecodeResult precode_qcm(const OfdmFrame& frame, const TapChannel& ch,
                          const TxAlphabet& alphabet, int iters, Schedule schedule,
                          double noise_var, rng::Substream* schedule_rng,
                          const FreqChannel* freq, const UpdateObserver& observer) {
  if (schedule == Schedule::RandomPermutation && schedule_rng == nullptr)
    throw std::invalid_argument("random-permutation schedule needs a random substream");
  return run_descent(frame, ch, alphabet, iters, noise_var, /*greedy=*/false, schedule,
                     schedule_rng, freq, observer);
}

PrecodeResult precode_qlp_zf(const OfdmFrame& frame, const TapChannel& ch,
                             const TxAlphabet& alphabet, double noise_var,
                             const FreqChannel* freq) {
  FreqChannel local;
  std::uint64_t freq_tally = 0;
  if (!freq) {
    local = frequency_response(ch, frame.t_f);
    freq = &local;
    freq_tally = static_cast<std::uint64_t>(ch.n_ue()) * ch.n_tx() *
                 dft_mult_count(frame.t_f);
  }

  std::uint64_t wtally = 0;
  const std::vector<MatrixXcd> weights =
      lmmse_weights(*freq, alphabet.power_budget, 0.0, &wtally);
  PrecodeResult lin = linear_precode(frame.freq, weights, frame.t_c, alphabet.power_budget);

  std::uint64_t qtally = 0;
  PrecodeResult res;
  res.x = quantize(lin.x, alphabet, &qtally);
  res.iterations = 1;
  res.ops.init = freq_tally;
  res.ops.weights = wtally;
  res.ops.apply = lin.ops.apply + qtally;
  // Receiver-side diagnostics; the GMI pipeline re-estimates its own gain, so
  // these stay outside the counted transmit path.
  res.alpha = optimal_alpha(res.x, ch, frame.time, noise_var);
  res.cost = cost_g(res.x, res.alpha, ch, frame.time, noise_var);
  return res;
}

}  // namespace qprec

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "qprec/channel.hpp"
#include "qprec/ofdm.hpp"
#include "qprec/rng.hpp"
#include "qprec/types.hpp"

namespace qprec {

/// Discrete transmit alphabet: the zero symbol plus 2^b equally spaced phases
/// of modulus sqrt(P/N). points[0] = 0, points[1 + q] = amp * e^{j 2 pi q / 2^b}.
struct TxAlphabet {
  double power_budget = 1.0;  // P
  int n_tx = 1;               // N
  int phase_bits = 1;         // b
  std::vector<cxd> points;

  static TxAlphabet make(double power_budget, int n_tx, int phase_bits);

  double amplitude() const;  ///< sqrt(P/N), the modulus of every nonzero point
  int size() const { return static_cast<int>(points.size()); }
};

/// Index of the alphabet point closest to v in Euclidean distance. Ties go to
/// the lowest index, which prefers 0 (index 0) over any phase point.
int nearest_point_index(cxd v, const TxAlphabet& alphabet);

/// Entrywise nearest-point projection onto the alphabet. `tally`, when given,
/// accumulates the real multiplications spent on distance evaluations.
MatrixXcd quantize(const MatrixXcd& x, const TxAlphabet& alphabet,
                   std::uint64_t* tally = nullptr);

/// Block MSE cost
///   G(x, alpha) = sum_t ||u[t] - alpha * sum_tau H[tau] x[t-tau]||^2
///                 + alpha^2 T K noise_var
/// with zero pre-block history. x is N x T, target is K x T.
double cost_g(const MatrixXcd& x, double alpha, const TapChannel& ch,
              const MatrixXcd& target, double noise_var);

/// Closed-form minimizer of G over alpha >= 0 for fixed x:
///   alpha = sum_t Re(u[t]^H v[t]) / (sum_t ||v[t]||^2 + T K noise_var),
/// clamped at 0 when the correlation is negative. Throws when the denominator
/// is zero (all-zero x with zero noise).
double optimal_alpha(const MatrixXcd& x, const TapChannel& ch, const MatrixXcd& target,
                     double noise_var);

/// Per-subcarrier linear MMSE (Wiener) precoding weights
///   W[m] = P H[m]^H (P H[m] H[m]^H + noise_var I)^{-1},
/// the zero-forcing pseudo-inverse when noise_var = 0. Throws "ZF infeasible"
/// when noise_var = 0 and some H[m] is row-rank deficient.
std::vector<MatrixXcd> lmmse_weights(const FreqChannel& freq_ch, double symbol_power,
                                     double noise_var, std::uint64_t* tally = nullptr);

/// Output of any precoder: the N x T transmit block, the common receive
/// scaling alpha, the final cost G, and the work done. `cost` is a fresh
/// G(x, alpha) value for the cost-minimizing precoders and for QLP; the purely
/// linear precoders have no cost model in play and report NaN there.
struct PrecodeResult {
  MatrixXcd x;
  double alpha = 0.0;
  double cost = 0.0;
  int iterations = 0;
  OpCounter ops;
};

/// Per-subcarrier weight application followed by per-antenna IDFTs and cyclic
/// prefix. The output is scaled so the block-average transmit energy per
/// channel use equals `power_budget`; alpha is set to make the end-to-end
/// gain unity under that scaling (alpha = 1/scale).
PrecodeResult linear_precode(const MatrixXcd& freq_data,
                             const std::vector<MatrixXcd>& weights, int t_c,
                             double power_budget = 1.0);

/// Antenna-visit order used by QCM within each time slot.
enum class Schedule {
  RoundRobin,         ///< ascending antenna index, every slot
  RandomPermutation,  ///< fresh permutation per (iteration, slot)
};

/// Notification after each accepted-or-skipped coordinate update and after
/// each alpha re-optimization. `cost` is the incrementally maintained G, the
/// quantity the descent guarantees are stated on.
struct UpdateEvent {
  enum class Kind { Coordinate, Alpha };
  Kind kind;
  int iteration;  ///< 0-based sweep index
  int slot;       ///< time index t, -1 for alpha updates
  int antenna;    ///< antenna index n, -1 for alpha updates
  double cost;
  double alpha;
  const MatrixXcd& x;
};
using UpdateObserver = std::function<void(const UpdateEvent&)>;

/// Mutable state of a coordinate-minimization run: the current block x, the
/// cached convolution v = H * x, residuals r = u - alpha v, and the cached
/// cost. One instance per precode invocation; updates are sequential.
class CoordState {
 public:
  CoordState(const TapChannel& ch, const MatrixXcd& target, const TxAlphabet& alphabet,
             double noise_var, MatrixXcd x_init, double alpha_init);

  /// Evaluates all candidate symbols for (slot, antenna), applies the best
  /// strictly improving one, and returns (chosen alphabet index, cached cost).
  /// Only the residual window [slot, min(slot + L - 1, T - 1)] is touched.
  std::pair<int, double> coordinate_update(int slot, int antenna);

  /// MAGIQ's greedy probe: best candidate index and its cost delta for one
  /// antenna, without mutating the state.
  std::pair<int, double> best_candidate(int slot, int antenna);

  /// One alpha epoch: closed-form alpha from the cached convolution, then
  /// residuals and cached cost are rebuilt under the new alpha.
  void reoptimize_alpha();

  double cost() const { return cost_; }
  double alpha() const { return alpha_; }
  const MatrixXcd& x() const { return x_; }
  OpCounter& ops() { return ops_; }

  /// Observer notified after every update; `iteration` tags its events.
  UpdateObserver observer;
  int iteration = 0;

 private:
  struct Candidate {
    int index;
    double delta;
    cxd diff;
  };
  Candidate probe(int slot, int antenna);

  const TapChannel& ch_;
  const MatrixXcd& target_;
  const TxAlphabet& alphabet_;
  double noise_var_;
  MatrixXcd x_;                    // N x T
  MatrixXcd v_;                    // K x T, sum_tau H[tau] x[t-tau]
  MatrixXcd r_;                    // K x T, target - alpha v
  double alpha_;
  double cost_;
  std::vector<double> col_energy_;  // N x (L+1) prefix sums of ||H[tau].col(n)||^2
  OpCounter ops_;

  void emit(UpdateEvent::Kind kind, int slot, int antenna);
};

/// Time-domain transmit matched filter H[m]^H u[m] per subcarrier, brought to
/// the time domain (IDFT + cyclic prefix), scaled so its RMS entry magnitude
/// matches the alphabet modulus, and quantized entrywise. Pass the frequency
/// response when it is already known; otherwise it is computed from ch.
MatrixXcd matched_filter_init(const OfdmFrame& frame, const TapChannel& ch,
                              const TxAlphabet& alphabet,
                              const FreqChannel* freq = nullptr,
                              OpCounter* ops = nullptr);

/// Greedy coordinate minimization: per slot, repeatedly pick the
/// (remaining antenna, symbol) pair with the lowest cost delta until every
/// antenna has been visited once; alpha re-optimized once per iteration.
/// Initialized from the quantized matched filter.
PrecodeResult precode_magiq(const OfdmFrame& frame, const TapChannel& ch,
                            const TxAlphabet& alphabet, int iters, double noise_var,
                            const FreqChannel* freq = nullptr,
                            const UpdateObserver& observer = {});

/// Same descent with a fixed antenna schedule instead of greedy selection.
/// schedule_rng supplies the permutations for Schedule::RandomPermutation and
/// may be null for round-robin.
PrecodeResult precode_qcm(const OfdmFrame& frame, const TapChannel& ch,
                          const TxAlphabet& alphabet, int iters, Schedule schedule,
                          double noise_var, rng::Substream* schedule_rng = nullptr,
                          const FreqChannel* freq = nullptr,
                          const UpdateObserver& observer = {});

/// Quantized linear precoding: zero-forcing linear_precode, entrywise
/// quantization to the alphabet, and a closed-form alpha for the quantized
/// block. The reported ops cover the weight computation, the linear apply and
/// the quantizer; the diagnostic alpha/cost evaluation is outside the counted
/// transmit path.
PrecodeResult precode_qlp_zf(const OfdmFrame& frame, const TapChannel& ch,
                             const TxAlphabet& alphabet, double noise_var,
                             const FreqChannel* freq = nullptr);

}  // namespace qprec

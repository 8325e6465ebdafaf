// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "qprec/precode.hpp"

using namespace qprec;

namespace {

struct Instance {
  TapChannel ch;
  OfdmFrame frame;
  TxAlphabet alphabet;
  double noise_var;
};

Instance make_instance(int n_tx, int n_ue, int t_f, int t_c, int n_taps, int bits,
                       double noise_var, std::uint64_t seed,
                       const std::string& constellation = "qpsk") {
  Instance inst;
  inst.ch = draw_rayleigh(n_tx, n_ue, n_taps, seed);
  inst.frame =
      make_frame(draw_data(Constellation::named(constellation), n_ue, t_f, seed + 1), t_c);
  inst.alphabet = TxAlphabet::make(1.0, n_tx, bits);
  inst.noise_var = noise_var;
  return inst;
}

MatrixXcd random_alphabet_block(const TxAlphabet& a, int n_tx, int len,
                                std::uint64_t seed) {
  rng::Substream rs(seed, rng::Stream::User, 3);
  MatrixXcd x(n_tx, len);
  for (int n = 0; n < n_tx; ++n)
    for (int t = 0; t < len; ++t)
      x(n, t) = a.points[rs.below(static_cast<std::uint64_t>(a.size()))];
  return x;
}

bool in_alphabet(cxd v, const TxAlphabet& a) {
  for (const cxd& p : a.points)
    if (v == p) return true;
  return false;
}

}  // namespace

TEST_CASE("the transmit alphabet is the zero symbol plus a phase ring") {
  const TxAlphabet a = TxAlphabet::make(4.0, 16, 2);
  REQUIRE(a.size() == 5);
  CHECK(a.amplitude() == doctest::Approx(0.5));
  CHECK(a.points[0] == cxd{0.0, 0.0});
  CHECK(std::abs(a.points[1] - cxd{0.5, 0.0}) < 1e-15);
  CHECK(std::abs(a.points[2] - cxd{0.0, 0.5}) < 1e-15);
  CHECK(std::abs(a.points[3] - cxd{-0.5, 0.0}) < 1e-15);
  CHECK(std::abs(a.points[4] - cxd{0.0, -0.5}) < 1e-15);
  for (int i = 1; i < a.size(); ++i)
    CHECK(std::abs(std::abs(a.points[i]) - a.amplitude()) < 1e-15);

  const TxAlphabet b1 = TxAlphabet::make(1.0, 4, 1);
  REQUIRE(b1.size() == 3);
  CHECK(std::abs(b1.points[1] - cxd{0.5, 0.0}) < 1e-15);
  CHECK(std::abs(b1.points[2] - cxd{-0.5, 0.0}) < 1e-15);

  CHECK_THROWS(TxAlphabet::make(0.0, 4, 2));
  CHECK_THROWS(TxAlphabet::make(1.0, 0, 2));
  CHECK_THROWS(TxAlphabet::make(1.0, 4, 0));
  CHECK_THROWS(TxAlphabet::make(1.0, 4, 17));
}

TEST_CASE("quantization projects onto the nearest alphabet point") {
  const TxAlphabet a = TxAlphabet::make(1.0, 1, 3);
  rng::Substream rs(12, rng::Stream::User, 0);
  for (int i = 0; i < 200; ++i) {
    const cxd v = 2.0 * rs.gaussian();
    const int idx = nearest_point_index(v, a);
    for (int j = 0; j < a.size(); ++j)
      CHECK(std::abs(v - a.points[idx]) <= std::abs(v - a.points[j]) + 1e-15);
  }

  MatrixXcd block(1, 3);
  block << cxd{0.9, 0.1}, cxd{-2.0, 0.1}, cxd{0.01, -0.02};
  const MatrixXcd q = quantize(block, a);
  CHECK(q(0, 0) == a.points[1]);   // near the 0-phase point
  CHECK(q(0, 2) == a.points[0]);   // near zero
  CHECK(quantize(q, a) == q);      // idempotent

  // exact tie between zero and a phase point resolves to zero (lowest index)
  const TxAlphabet unit = TxAlphabet::make(1.0, 1, 2);
  MatrixXcd tie(1, 1);
  tie << cxd{0.5, 0.0};
  CHECK(quantize(tie, unit)(0, 0) == cxd{0.0, 0.0});
}

TEST_CASE("the cost at alpha 0 is the target energy plus nothing") {
  const Instance inst = make_instance(4, 2, 8, 2, 3, 2, 0.3, 101);
  const MatrixXcd x =
      random_alphabet_block(inst.alphabet, 4, inst.frame.block_len(), 5);
  CHECK(cost_g(x, 0.0, inst.ch, inst.frame.time, inst.noise_var) ==
        doctest::Approx(inst.frame.time.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("the cost matches the naive scalar evaluation") {
  const Instance inst = make_instance(4, 2, 7, 2, 3, 2, 0.2, 103);
  const MatrixXcd x =
      random_alphabet_block(inst.alphabet, 4, inst.frame.block_len(), 7);
  for (double alpha : {0.0, 0.37, 1.4}) {
    const double mine = cost_g(x, alpha, inst.ch, inst.frame.time, inst.noise_var);
    const double ref = oracle::naive_cost(x, alpha, inst.ch, inst.frame.time,
                                          inst.noise_var);
    CHECK(mine == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("a perfectly matched block has zero cost") {
  const TapChannel ch = draw_rayleigh(3, 2, 2, 105);
  const MatrixXcd x = random_alphabet_block(TxAlphabet::make(1.0, 3, 3), 3, 9, 9);
  const MatrixXcd target = convolve(ch, x);
  CHECK(cost_g(x, 1.0, ch, target, 0.0) < 1e-12 * target.squaredNorm());
}

TEST_CASE("optimal_alpha minimizes the quadratic and clamps at zero") {
  const Instance inst = make_instance(4, 2, 8, 2, 3, 2, 0.15, 107);
  const MatrixXcd x =
      random_alphabet_block(inst.alphabet, 4, inst.frame.block_len(), 11);
  const double a_star = optimal_alpha(x, inst.ch, inst.frame.time, inst.noise_var);
  const double best = cost_g(x, a_star, inst.ch, inst.frame.time, inst.noise_var);
  for (double d : {1e-3, 1e-2, 0.1}) {
    CHECK(best <= cost_g(x, a_star + d, inst.ch, inst.frame.time, inst.noise_var));
    if (a_star - d >= 0.0)  // the cost is only defined for nonnegative gains
      CHECK(best <= cost_g(x, a_star - d, inst.ch, inst.frame.time, inst.noise_var));
  }

  // target produced by the channel itself: alpha is exactly 1 under zero noise
  const MatrixXcd matched = convolve(inst.ch, x);
  CHECK(optimal_alpha(x, inst.ch, matched, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  // scaling the target scales alpha linearly
  CHECK(optimal_alpha(x, inst.ch, 2.0 * matched, 0.0) ==
        doctest::Approx(2.0).epsilon(1e-12));

  // anti-correlated target clamps to zero
  CHECK(optimal_alpha(x, inst.ch, -matched, 0.1) == 0.0);

  // all-zero block: fine under noise (alpha 0), degenerate without it
  const MatrixXcd zero = MatrixXcd::Zero(4, inst.frame.block_len());
  CHECK(optimal_alpha(zero, inst.ch, inst.frame.time, 0.1) == 0.0);
  CHECK_THROWS(optimal_alpha(zero, inst.ch, inst.frame.time, 0.0));
}

TEST_CASE("zero-noise weights invert the channel") {
  const TapChannel ch = draw_rayleigh(8, 4, 3, 109);
  const FreqChannel fc = frequency_response(ch, 8);
  const std::vector<MatrixXcd> w = lmmse_weights(fc, 1.0, 0.0);
  REQUIRE(w.size() == 8);
  for (int m = 0; m < 8; ++m) {
    const MatrixXcd prod = fc.per_subcarrier[m] * w[m];
    CHECK((prod - MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("weights reduce to the scalar Wiener filter") {
  const TapChannel ch = draw_rayleigh(1, 1, 1, 111);
  const FreqChannel fc = frequency_response(ch, 4);
  const double p = 2.0;
  const double nv = 0.3;
  const std::vector<MatrixXcd> w = lmmse_weights(fc, p, nv);
  const cxd h = ch.taps[0](0, 0);
  const cxd expect = p * std::conj(h) / (p * std::norm(h) + nv);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(w[m](0, 0) - expect) < 1e-12);
}

TEST_CASE("mmse weights approach zero-forcing as noise vanishes") {
  const TapChannel ch = draw_rayleigh(6, 3, 2, 113);
  const FreqChannel fc = frequency_response(ch, 4);
  const std::vector<MatrixXcd> zf = lmmse_weights(fc, 1.0, 0.0);
  const std::vector<MatrixXcd> near = lmmse_weights(fc, 1.0, 1e-9);
  for (int m = 0; m < 4; ++m)
    CHECK((zf[m] - near[m]).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("zero-forcing refuses rank-deficient channels") {
  TapChannel ch = draw_rayleigh(4, 2, 1, 115);
  ch.taps[0].row(1) = ch.taps[0].row(0);  // duplicate UE
  const FreqChannel fc = frequency_response(ch, 2);
  CHECK_THROWS_WITH_AS(lmmse_weights(fc, 1.0, 0.0) /* ZF */,
                       doctest::Contains("ZF infeasible"), std::runtime_error);
  CHECK_NOTHROW(lmmse_weights(fc, 1.0, 0.1));  // regularized solve is fine
}

TEST_CASE("linear precoding meets the power budget with unit end-to-end gain") {
  const int t_f = 16;
  const int t_c = 2;
  const double p = 1.7;
  const TapChannel ch = draw_rayleigh(8, 4, 3, 117);
  const FreqChannel fc = frequency_response(ch, t_f);
  const std::vector<MatrixXcd> w = lmmse_weights(fc, p, 0.0);
  const MatrixXcd data = draw_data(Constellation::named("16qam"), 4, t_f, 118);
  const PrecodeResult pr = linear_precode(data, w, t_c, p);

  CHECK(pr.iterations == 1);
  CHECK(std::isnan(pr.cost));
  CHECK(pr.x.squaredNorm() / pr.x.cols() == doctest::Approx(p).epsilon(1e-9));

  // through the true channel, alpha restores the data on every subcarrier
  const MatrixXcd rx = from_time(convolve(ch, pr.x), t_f, t_c);
  CHECK((pr.alpha * rx - data).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("matched-filter initialization lands in the alphabet") {
  const Instance inst = make_instance(6, 3, 16, 3, 4, 2, 0.1, 119, "16qam");
  const MatrixXcd x0 = matched_filter_init(inst.frame, inst.ch, inst.alphabet);
  REQUIRE(x0.rows() == 6);
  REQUIRE(x0.cols() == inst.frame.block_len());
  int nonzero = 0;
  for (int n = 0; n < x0.rows(); ++n)
    for (int t = 0; t < x0.cols(); ++t) {
      CHECK(in_alphabet(x0(n, t), inst.alphabet));
      if (x0(n, t) != cxd{0.0, 0.0}) ++nonzero;
    }
  // RMS matching the ring modulus keeps most entries away from the origin
  CHECK(nonzero > x0.size() / 2);
  CHECK(matched_filter_init(inst.frame, inst.ch, inst.alphabet) == x0);
}

TEST_CASE("matched-filter start beats a zero start on most seeds") {
  const double noise_var = std::pow(10.0, -1.2);
  int mf_wins = 0;
  const int trials = 100;
  for (int i = 0; i < trials; ++i) {
    const Instance inst =
        make_instance(4, 2, 8, 1, 2, 2, noise_var, 3000 + 2 * i, "qpsk");
    const int iters = 3;
    const PrecodeResult mf =
        precode_qcm(inst.frame, inst.ch, inst.alphabet, iters, Schedule::RoundRobin,
                    inst.noise_var);

    CoordState zero(inst.ch, inst.frame.time, inst.alphabet, inst.noise_var,
                    MatrixXcd::Zero(4, inst.frame.block_len()), 1.0);
    for (int it = 0; it < iters; ++it) {
      for (int t = 0; t < inst.frame.block_len(); ++t)
        for (int n = 0; n < 4; ++n) zero.coordinate_update(t, n);
      zero.reoptimize_alpha();
    }
    if (mf.cost <= zero.cost() + 1e-12) ++mf_wins;
  }
  CHECK(mf_wins >= 60);
}

TEST_CASE("coordinate updates only improve and track the true cost") {
  const Instance inst = make_instance(4, 2, 8, 2, 3, 2, 0.05, 121, "16qam");
  double prev = std::numeric_limits<double>::infinity();
  int coord_events = 0;
  int alpha_events = 0;
  bool monotone = true;
  bool consistent = true;
  const UpdateObserver obs = [&](const UpdateEvent& ev) {
    if (ev.cost > prev + 1e-12 * std::max(1.0, prev)) monotone = false;
    prev = ev.cost;
    const double fresh = cost_g(ev.x, ev.alpha, inst.ch, inst.frame.time,
                                inst.noise_var);
    if (std::abs(ev.cost - fresh) > 1e-9 * std::max(1.0, fresh)) consistent = false;
    if (ev.kind == UpdateEvent::Kind::Coordinate) ++coord_events;
    if (ev.kind == UpdateEvent::Kind::Alpha) ++alpha_events;
  };

  const int iters = 3;
  const PrecodeResult pr = precode_qcm(inst.frame, inst.ch, inst.alphabet, iters,
                                       Schedule::RoundRobin, inst.noise_var, nullptr,
                                       nullptr, obs);
  CHECK(monotone);
  CHECK(consistent);
  CHECK(coord_events == iters * inst.frame.block_len() * 4);
  CHECK(alpha_events == iters);
  CHECK(pr.iterations == iters);
  CHECK(pr.cost == doctest::Approx(cost_g(pr.x, pr.alpha, inst.ch, inst.frame.time,
                                          inst.noise_var))
                       .epsilon(1e-9));
  // the last update of an iteration is the alpha epoch, so the final alpha is
  // the closed-form optimum for the final block
  CHECK(pr.alpha == doctest::Approx(optimal_alpha(pr.x, inst.ch, inst.frame.time,
                                                  inst.noise_var))
                        .epsilon(1e-9));
}

TEST_CASE("updates touch one symbol and a bounded residual window") {
  const Instance inst = make_instance(3, 2, 8, 2, 3, 1, 0.1, 123);
  MatrixXcd prev_x = matched_filter_init(inst.frame, inst.ch, inst.alphabet);
  bool single_symbol = true;
  bool window_bounded = true;
  MatrixXcd prev_v = convolve(inst.ch, prev_x);
  const UpdateObserver obs = [&](const UpdateEvent& ev) {
    if (ev.kind != UpdateEvent::Kind::Coordinate) return;
    int changed = 0;
    for (int n = 0; n < ev.x.rows(); ++n)
      for (int t = 0; t < ev.x.cols(); ++t)
        if (ev.x(n, t) != prev_x(n, t)) {
          ++changed;
          if (n != ev.antenna || t != ev.slot) single_symbol = false;
        }
    if (changed > 1) single_symbol = false;
    if (changed == 1) {
      const MatrixXcd v = convolve(inst.ch, ev.x);
      for (int t = 0; t < v.cols(); ++t) {
        const bool inside = t >= ev.slot && t <= ev.slot + inst.ch.n_taps() - 1;
        if (!inside && (v.col(t) - prev_v.col(t)).cwiseAbs().maxCoeff() > 0.0)
          window_bounded = false;
      }
      prev_v = v;
    }
    prev_x = ev.x;
  };
  precode_qcm(inst.frame, inst.ch, inst.alphabet, 2, Schedule::RoundRobin,
              inst.noise_var, nullptr, nullptr, obs);
  CHECK(single_symbol);
  CHECK(window_bounded);
}

TEST_CASE("descent reaches the exhaustive optimum on tiny instances") {
  int at_optimum = 0;
  for (int i = 0; i < 5; ++i) {
    const double nv = (i % 2 == 0) ? 0.1 : 0.0;
    const Instance inst = make_instance(2, 1, 2, 0, 1, 1, nv, 4000 + i);
    const PrecodeResult pr = precode_qcm(inst.frame, inst.ch, inst.alphabet, 8,
                                         Schedule::RoundRobin, inst.noise_var);
    const oracle::ExhaustiveResult best =
        oracle::exhaustive_min(inst.ch, inst.frame.time, inst.alphabet, nv);
    CHECK(pr.cost >= best.cost - 1e-12 * std::max(1.0, best.cost));

    const bool global = pr.cost <= best.cost + 1e-9 * std::max(1.0, best.cost);
    if (global) ++at_optimum;

    // either way the result must be a single-coordinate local minimum
    for (int n = 0; n < 2; ++n)
      for (int t = 0; t < 2; ++t)
        for (const cxd& p : inst.alphabet.points) {
          MatrixXcd variant = pr.x;
          variant(n, t) = p;
          CHECK(oracle::naive_cost(variant, pr.alpha, inst.ch, inst.frame.time, nv) >=
                pr.cost - 1e-12 * std::max(1.0, pr.cost));
        }
  }
  CHECK(at_optimum >= 3);  // the descent should usually find the global optimum
}

TEST_CASE("round-robin and random schedules land close together") {
  double gap_sum = 0.0;
  const int trials = 50;
  const double noise_var = std::pow(10.0, -0.8);  // 8 dB working point
  for (int i = 0; i < trials; ++i) {
    const Instance inst = make_instance(16, 4, 32, 1, 2, 2, noise_var, 5000 + i);
    const PrecodeResult rr = precode_qcm(inst.frame, inst.ch, inst.alphabet, 6,
                                         Schedule::RoundRobin, inst.noise_var);
    rng::Substream sched(9, rng::Stream::Schedule, static_cast<std::uint64_t>(i));
    const PrecodeResult rp =
        precode_qcm(inst.frame, inst.ch, inst.alphabet, 6,
                    Schedule::RandomPermutation, inst.noise_var, &sched);
    gap_sum += std::abs(rr.cost - rp.cost) / std::min(rr.cost, rp.cost);
  }
  CHECK(gap_sum / trials < 0.02);

  // the random schedule itself is reproducible from its substream
  const Instance inst = make_instance(4, 2, 8, 1, 2, 2, 0.05, 5500);
  rng::Substream s1(9, rng::Stream::Schedule, 0);
  rng::Substream s2(9, rng::Stream::Schedule, 0);
  const PrecodeResult a = precode_qcm(inst.frame, inst.ch, inst.alphabet, 3,
                                      Schedule::RandomPermutation, inst.noise_var, &s1);
  const PrecodeResult b = precode_qcm(inst.frame, inst.ch, inst.alphabet, 3,
                                      Schedule::RandomPermutation, inst.noise_var, &s2);
  CHECK(a.x == b.x);
  CHECK(a.cost == b.cost);
}

TEST_CASE("the greedy variant visits every antenna once per slot") {
  const Instance inst = make_instance(4, 2, 8, 2, 3, 2, 0.05, 125, "16qam");
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  int coord_events = 0;
  const UpdateObserver obs = [&](const UpdateEvent& ev) {
    if (ev.cost > prev + 1e-12 * std::max(1.0, prev)) monotone = false;
    prev = ev.cost;
    if (ev.kind == UpdateEvent::Kind::Coordinate) ++coord_events;
  };
  const int iters = 2;
  const PrecodeResult pr =
      precode_magiq(inst.frame, inst.ch, inst.alphabet, iters, inst.noise_var, nullptr,
                    obs);
  CHECK(monotone);
  CHECK(coord_events == iters * inst.frame.block_len() * 4);
  CHECK(pr.cost == doctest::Approx(cost_g(pr.x, pr.alpha, inst.ch, inst.frame.time,
                                          inst.noise_var))
                       .epsilon(1e-9));
  for (int n = 0; n < pr.x.rows(); ++n)
    for (int t = 0; t < pr.x.cols(); ++t) CHECK(in_alphabet(pr.x(n, t), inst.alphabet));
}

TEST_CASE("quantized linear precoding is the quantized ZF solution") {
  const Instance inst = make_instance(8, 4, 16, 3, 4, 2, 0.05, 127, "16qam");
  const PrecodeResult pr =
      precode_qlp_zf(inst.frame, inst.ch, inst.alphabet, inst.noise_var);

  // reconstruct by hand: ZF linear precode, then entrywise quantization
  const FreqChannel fc = frequency_response(inst.ch, 16);
  const std::vector<MatrixXcd> w = lmmse_weights(fc, 1.0, 0.0);
  const PrecodeResult lin = linear_precode(inst.frame.freq, w, 3, 1.0);
  CHECK(pr.x == quantize(lin.x, inst.alphabet));

  CHECK(pr.alpha >= 0.0);
  CHECK(pr.alpha == doctest::Approx(optimal_alpha(pr.x, inst.ch, inst.frame.time,
                                                  inst.noise_var))
                        .epsilon(1e-12));
  CHECK(pr.cost == doctest::Approx(cost_g(pr.x, pr.alpha, inst.ch, inst.frame.time,
                                          inst.noise_var))
                       .epsilon(1e-12));
  CHECK(pr.iterations == 1);
}

TEST_CASE("operation counts are reproducible and populated") {
  const Instance inst = make_instance(4, 2, 8, 2, 3, 2, 0.05, 129, "16qam");
  const PrecodeResult a = precode_qcm(inst.frame, inst.ch, inst.alphabet, 3,
                                      Schedule::RoundRobin, inst.noise_var);
  const PrecodeResult b = precode_qcm(inst.frame, inst.ch, inst.alphabet, 3,
                                      Schedule::RoundRobin, inst.noise_var);
  CHECK(a.ops.init == b.ops.init);
  CHECK(a.ops.iter == b.ops.iter);
  CHECK(a.ops.total() == b.ops.total());
  CHECK(a.ops.init > 0);
  CHECK(a.ops.iter > 0);

  const PrecodeResult q = precode_qlp_zf(inst.frame, inst.ch, inst.alphabet, 0.05);
  CHECK(q.ops.weights > 0);
  CHECK(q.ops.apply > 0);
  CHECK(q.ops.iter == 0);
}

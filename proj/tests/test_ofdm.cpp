// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "qprec/channel.hpp"
#include "qprec/dft.hpp"
#include "qprec/ofdm.hpp"

using namespace qprec;

namespace {
std::vector<cxd> random_signal(int n, std::uint64_t tag) {
  rng::Substream rs(tag, rng::Stream::User, 0);
  std::vector<cxd> x(n);
  for (cxd& v : x) v = rs.gaussian();
  return x;
}
}  // namespace

TEST_CASE("radix-2 and direct transforms agree with the naive oracle") {
  for (int n : {12, 64}) {  // one direct-path size, one FFT-path size
    const std::vector<cxd> x = random_signal(n, 17 + n);
    for (bool inverse : {false, true}) {
      std::vector<cxd> fast = x;
      dft_inplace(fast, inverse);
      std::vector<cxd> direct = x;
      dft_direct_inplace(direct, inverse);
      const std::vector<cxd> ref = oracle::naive_dft(x, inverse);
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(fast[i] - ref[i]) < 1e-10);
        CHECK(std::abs(direct[i] - ref[i]) < 1e-10);
      }
    }
  }
}

TEST_CASE("forward then inverse scales by the length") {
  const int n = 128;
  const std::vector<cxd> x = random_signal(n, 3);
  std::vector<cxd> buf = x;
  dft_inplace(buf, false);
  dft_inplace(buf, true);
  for (int i = 0; i < n; ++i) CHECK(std::abs(buf[i] - double(n) * x[i]) < 1e-9);
}

TEST_CASE("transforms preserve energy up to the length factor") {
  const int n = 64;
  const std::vector<cxd> x = random_signal(n, 5);
  double in = 0.0;
  for (const cxd& v : x) in += std::norm(v);
  std::vector<cxd> buf = x;
  dft_inplace(buf, false);
  double out = 0.0;
  for (const cxd& v : buf) out += std::norm(v);
  CHECK(out == doctest::Approx(n * in).epsilon(1e-10));
}

TEST_CASE("transform cost model matches the implementation split") {
  CHECK(dft_mult_count(64) == 4ull * 32 * 6);  // radix-2 path
  CHECK(dft_mult_count(12) == 4ull * 12 * 12); // direct path
  CHECK(is_power_of_two(64));
  CHECK(!is_power_of_two(12));
}

TEST_CASE("constellations are unit-energy, zero-mean and the right size") {
  const std::map<std::string, int> sizes = {
      {"qpsk", 4},  {"4psk", 4},  {"8psk", 8},   {"16psk", 16},
      {"32psk", 32}, {"16qam", 16}, {"64qam", 64},
  };
  for (const auto& [name, size] : sizes) {
    const Constellation c = Constellation::named(name);
    REQUIRE(c.size() == size);
    CHECK(c.bits() == doctest::Approx(std::log2(size)));
    cxd mean{0.0, 0.0};
    double energy = 0.0;
    for (const cxd& p : c.points) {
      mean += p;
      energy += std::norm(p);
    }
    CHECK(std::abs(mean) / size < 1e-12);
    CHECK(energy / size == doctest::Approx(1.0).epsilon(1e-12));
    for (int a = 0; a < size; ++a)
      for (int b = a + 1; b < size; ++b) CHECK(std::abs(c.points[a] - c.points[b]) > 1e-6);
  }
  CHECK_THROWS(Constellation::named("13apsk"));
}

TEST_CASE("psk and qam variants hit the expected point sets") {
  const Constellation qpsk = Constellation::named("qpsk");
  for (const cxd& p : qpsk.points) {
    CHECK(std::abs(std::abs(p.real()) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(std::abs(p.imag()) - 1.0 / std::sqrt(2.0)) < 1e-12);
  }
  const Constellation psk4 = Constellation::named("4psk");
  const bool has_unity = std::any_of(psk4.points.begin(), psk4.points.end(),
                                     [](cxd p) { return std::abs(p - cxd{1.0, 0.0}) < 1e-12; });
  CHECK(has_unity);

  const Constellation qam = Constellation::named("16qam");
  double lo = 1e9;
  double hi = 0.0;
  for (const cxd& p : qam.points) {
    lo = std::min(lo, std::norm(p));
    hi = std::max(hi, std::norm(p));
  }
  CHECK(lo == doctest::Approx(2.0 / 10.0));   // (1+j)/sqrt(10) corners
  CHECK(hi == doctest::Approx(18.0 / 10.0));  // (3+3j)/sqrt(10) corners
}

TEST_CASE("data draws are deterministic, in-alphabet and roughly uniform") {
  const Constellation c = Constellation::named("qpsk");
  const MatrixXcd a = draw_data(c, 2, 8192, 50);
  const MatrixXcd b = draw_data(c, 2, 8192, 50);
  CHECK(a == b);

  std::map<int, int> counts;
  for (int k = 0; k < a.rows(); ++k)
    for (int t = 0; t < a.cols(); ++t) {
      int idx = -1;
      for (int i = 0; i < c.size(); ++i)
        if (a(k, t) == c.points[i]) idx = i;
      REQUIRE(idx >= 0);
      ++counts[idx];
    }
  const double expect = 2.0 * 8192.0 / c.size();
  for (const auto& [idx, n] : counts) CHECK(n == doctest::Approx(expect).epsilon(0.1));
}

TEST_CASE("a single tone becomes a scaled complex exponential") {
  const int t_f = 16;
  const int t_c = 3;
  const int m0 = 5;
  MatrixXcd freq = MatrixXcd::Zero(1, t_f);
  freq(0, m0) = cxd{1.0, 0.0};
  const MatrixXcd time = to_time(freq, t_c);
  REQUIRE(time.cols() == t_f + t_c);
  for (int t = 0; t < t_f; ++t) {
    const double ang = 2.0 * M_PI * m0 * t / t_f;
    const cxd expect = cxd{std::cos(ang), std::sin(ang)} / double(t_f);
    CHECK(std::abs(time(0, t_c + t) - expect) < 1e-12);
  }
}

TEST_CASE("the cyclic prefix repeats the block tail") {
  const MatrixXcd freq = draw_data(Constellation::named("16qam"), 3, 32, 60);
  const MatrixXcd time = to_time(freq, 5);
  CHECK(time.leftCols(5) == time.middleCols(32, 5));
}

TEST_CASE("from_time inverts to_time") {
  const MatrixXcd freq = draw_data(Constellation::named("8psk"), 3, 64, 61);
  const MatrixXcd back = from_time(to_time(freq, 7), 64, 7);
  CHECK((back - freq).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("the prefix turns multipath into per-subcarrier scalars") {
  const int t_f = 16;
  const int t_c = 3;
  const TapChannel ch = draw_rayleigh(1, 1, 4, 70);  // L = 4 <= t_c + 1
  const FreqChannel fc = frequency_response(ch, t_f);
  const MatrixXcd data = draw_data(Constellation::named("qpsk"), 1, t_f, 71);
  const MatrixXcd rx = convolve(ch, to_time(data, t_c));
  const MatrixXcd rx_freq = from_time(rx, t_f, t_c);
  for (int m = 0; m < t_f; ++m)
    CHECK(std::abs(rx_freq(0, m) - fc.per_subcarrier[m](0, 0) * data(0, m)) < 1e-10);
}

TEST_CASE("make_frame pairs the grid with its time image") {
  const MatrixXcd freq = draw_data(Constellation::named("qpsk"), 2, 8, 80);
  const OfdmFrame frame = make_frame(freq, 2);
  CHECK(frame.t_f == 8);
  CHECK(frame.t_c == 2);
  CHECK(frame.n_ue() == 2);
  CHECK(frame.block_len() == 10);
  CHECK(frame.time == to_time(freq, 2));
}

TEST_CASE("substreams separate by stream id and index") {
  rng::Substream a(1, rng::Stream::Noise, 0);
  rng::Substream b(1, rng::Stream::Noise, 0);
  rng::Substream c(1, rng::Stream::Data, 0);
  rng::Substream d(1, rng::Stream::Noise, 1);
  const std::uint64_t va = a.next_u64();
  CHECK(va == b.next_u64());
  CHECK(va != c.next_u64());
  CHECK(va != d.next_u64());
}

TEST_CASE("permutations and pilot samples are well-formed") {
  rng::Substream rs(2, rng::Stream::Schedule, 0);
  const std::vector<int> p = rs.permutation(17);
  std::vector<int> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 17; ++i) CHECK(sorted[i] == i);

  rng::Substream ps(2, rng::Stream::Pilot, 0);
  const std::vector<int> pilots = ps.sample_without_replacement(256, 26);
  REQUIRE(pilots.size() == 26);
  for (std::size_t i = 1; i < pilots.size(); ++i) CHECK(pilots[i] > pilots[i - 1]);
  CHECK(pilots.front() >= 0);
  CHECK(pilots.back() < 256);
}

TEST_CASE("gaussian draws have the right moments") {
  rng::Substream rs(3, rng::Stream::User, 4);
  cxd mean{0.0, 0.0};
  double energy = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const cxd z = rs.gaussian();
    mean += z / double(n);
    energy += std::norm(z) / n;
  }
  CHECK(std::abs(mean) < 0.02);
  CHECK(energy == doctest::Approx(1.0).epsilon(0.02));
}

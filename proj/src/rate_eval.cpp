// SPDX-License-Identifier: Apache-2.0
#include "qprec/rate_eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "qprec/channel.hpp"
#include "qprec/dft.hpp"
#include "qprec/precode.hpp"
#include "qprec/rng.hpp"

namespace qprec {

AuxChannelParams estimate_params(const VectorXcd& tx, const VectorXcd& rx,
                                 const std::vector<int>& estimation_set) {
  if (tx.size() != rx.size())
    throw std::invalid_argument("tx and rx sequences differ in length");
  if (estimation_set.empty())
    throw std::invalid_argument("estimation set is empty");

  cxd cross(0.0, 0.0);
  double energy = 0.0;
  for (int i : estimation_set) {
    if (i < 0 || i >= tx.size())
      throw std::invalid_argument("estimation index out of range");
    cross += rx[i] * std::conj(tx[i]);
    energy += std::norm(tx[i]);
  }
  if (!(energy > 0.0))
    throw std::invalid_argument("degenerate pilots: zero transmit energy");

  AuxChannelParams p;
  p.gain = cross / energy;
  double resid = 0.0;
  for (int i : estimation_set) resid += std::norm(rx[i] - p.gain * tx[i]);
  p.noise_var = std::max(kNoiseVarFloor, resid / static_cast<double>(estimation_set.size()));
  p.exponent = 1.0;
  return p;
}

double gmi_rate(const VectorXcd& tx, const VectorXcd& rx, const AuxChannelParams& params,
                const Constellation& constellation, const std::vector<int>& excluded_set) {
  const Eigen::Index s_total = tx.size();
  if (rx.size() != s_total)
    throw std::invalid_argument("tx and rx sequences differ in length");
  if (s_total == 0) throw std::invalid_argument("empty symbol sequence");
  if (!(params.exponent > 0.0)) throw std::invalid_argument("exponent s must be positive");
  const int m = constellation.size();

  std::vector<char> excluded(s_total, 0);
  for (int i : excluded_set) {
    if (i < 0 || i >= s_total) throw std::invalid_argument("excluded index out of range");
    excluded[i] = 1;
  }

  const double sq = std::max(params.noise_var, kNoiseVarFloor);
  const double c = params.exponent / sq;
  const double ln_m = std::log(static_cast<double>(m));
  std::vector<double> expo(m);

  // Per symbol: log2 of q^s(y|x) over the uniform mixture (1/M) sum_a q^s(y|a).
  // The Gaussian prefactor cancels in the ratio, leaving the exponents.
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s_total; ++i) {
    if (excluded[i]) continue;
    const cxd y = rx[i];
    double emax = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < m; ++a) {
      expo[a] = -c * std::norm(y - params.gain * constellation.points[a]);
      if (expo[a] > emax) emax = expo[a];
    }
    double sum = 0.0;
    for (int a = 0; a < m; ++a) sum += std::exp(expo[a] - emax);
    const double lse = emax + std::log(sum);
    const double ex = -c * std::norm(y - params.gain * tx[i]);
    acc += ex - lse + ln_m;
  }
  return acc / (static_cast<double>(s_total) * std::log(2.0));
}

std::pair<double, double> optimize_s(const VectorXcd& tx, const VectorXcd& rx,
                                     const AuxChannelParams& params,
                                     const Constellation& constellation,
                                     const std::vector<int>& excluded_set,
                                     const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("exponent grid is empty");
  double best_s = 0.0;
  double best_rate = -std::numeric_limits<double>::infinity();
  for (double s : grid) {
    AuxChannelParams p = params;
    p.exponent = s;
    const double rate = gmi_rate(tx, rx, p, constellation, excluded_set);
    if (rate > best_rate) {
      best_rate = rate;
      best_s = s;
    }
  }
  return {best_s, best_rate};
}

namespace {

struct BlockResult {
  std::vector<double> rates;
  double alpha_sum = 0.0;
  int alpha_count = 0;
  OpCounter ops;
  int invocations = 0;
  std::string error;
};

BlockResult run_block(const SystemConfig& cfg, const std::string& precoder,
                      double noise_var, EstimationMode mode, std::uint64_t seed, int b,
                      const Constellation& cons, const TxAlphabet& alphabet,
                      double epsilon, int n_pilots) {
  BlockResult out;
  const int n_ue = cfg.n_ue;
  const int n_sym = cfg.symbols_per_block();
  const int s_total = cfg.coherence;
  const auto bi = static_cast<std::uint64_t>(b);

  rng::Substream ch_rs(seed, rng::Stream::Channel, bi);
  const TapChannel h_true = draw_rayleigh(cfg.n_tx, n_ue, cfg.n_taps, ch_rs);
  rng::Substream csi_rs(seed, rng::Stream::Csi, bi);
  const TapChannel h_known = corrupt_csi(h_true, epsilon, csi_rs);
  const FreqChannel f_known = frequency_response(h_known, cfg.t_f);
  out.ops.init += static_cast<std::uint64_t>(n_ue) * cfg.n_tx * dft_mult_count(cfg.t_f);

  std::vector<MatrixXcd> weights;  // once per block, shared by every OFDM symbol
  if (precoder == "lp-zf" || precoder == "qlp-zf")
    weights = lmmse_weights(f_known, cfg.power_budget, 0.0, &out.ops.weights);
  else if (precoder == "lp-mmse")
    weights = lmmse_weights(f_known, cfg.power_budget, noise_var, &out.ops.weights);

  rng::Substream data_rs(seed, rng::Stream::Data, bi);
  rng::Substream noise_rs(seed, rng::Stream::Noise, bi);
  rng::Substream sched_rs(seed, rng::Stream::Schedule, bi);

  MatrixXcd tx_all(n_ue, s_total);
  MatrixXcd rx_all(n_ue, s_total);
  for (int l = 0; l < n_sym; ++l) {
    const MatrixXcd data = draw_data(cons, n_ue, cfg.t_f, data_rs);
    const OfdmFrame frame = make_frame(data, cfg.t_c);

    PrecodeResult pr;
    if (precoder == "lp-zf" || precoder == "lp-mmse") {
      pr = linear_precode(frame.freq, weights, cfg.t_c, cfg.power_budget);
    } else if (precoder == "qlp-zf") {
      pr = linear_precode(frame.freq, weights, cfg.t_c, cfg.power_budget);
      std::uint64_t qtally = 0;
      pr.x = quantize(pr.x, alphabet, &qtally);
      pr.ops.apply += qtally;
      pr.alpha = optimal_alpha(pr.x, h_known, frame.time, noise_var);
    } else if (precoder == "qcm") {
      pr = precode_qcm(frame, h_known, alphabet, cfg.iters, cfg.schedule, noise_var,
                       &sched_rs, &f_known);
    } else if (precoder == "magiq") {
      pr = precode_magiq(frame, h_known, alphabet, cfg.iters, noise_var, &f_known);
    } else {
      throw std::invalid_argument("unknown precoder \"" + precoder + "\"");
    }
    out.ops += pr.ops;
    out.alpha_sum += pr.alpha;
    out.alpha_count += 1;
    out.invocations += 1;

    const MatrixXcd y = apply_channel(h_true, pr.x, noise_var, noise_rs);
    tx_all.middleCols(static_cast<Eigen::Index>(l) * cfg.t_f, cfg.t_f) = data;
    rx_all.middleCols(static_cast<Eigen::Index>(l) * cfg.t_f, cfg.t_f) =
        from_time(y, cfg.t_f, cfg.t_c);
  }

  std::vector<int> est_set;
  std::vector<int> excluded;
  if (mode == EstimationMode::Pat) {
    rng::Substream pilot_rs(seed, rng::Stream::Pilot, bi);
    est_set = pilot_rs.sample_without_replacement(s_total, n_pilots);
    excluded = est_set;
  } else {
    est_set.resize(s_total);
    std::iota(est_set.begin(), est_set.end(), 0);
  }

  out.rates.resize(n_ue);
  for (int k = 0; k < n_ue; ++k) {
    const VectorXcd txk = tx_all.row(k).transpose();
    const VectorXcd rxk = rx_all.row(k).transpose();
    const AuxChannelParams prm = estimate_params(txk, rxk, est_set);
    out.rates[k] = gmi_rate(txk, rxk, prm, cons, excluded);
  }
  return out;
}

}  // namespace

GmiReport evaluate_system(const SystemConfig& config, const std::string& precoder,
                          double snr_db, int blocks, EstimationMode mode,
                          std::uint64_t seed, int workers) {
  validate_config(config);
  if (!is_known_precoder(precoder))
    throw std::invalid_argument("unknown precoder \"" + precoder + "\"");
  if (blocks < 1) throw std::invalid_argument("block count must be at least 1");
  if (config.epsilon_grid.size() != 1)
    throw std::invalid_argument(
        "evaluate_system needs a single epsilon; sweeps expand the grid");
  const double epsilon = config.epsilon_grid[0];
  const double noise_var = config.power_budget * std::pow(10.0, -snr_db / 10.0);
  const Constellation cons = Constellation::named(config.constellation);
  const TxAlphabet alphabet =
      TxAlphabet::make(config.power_budget, config.n_tx, config.phase_bits);

  int n_pilots = 0;
  if (mode == EstimationMode::Pat) {
    n_pilots = static_cast<int>(std::llround(config.pilot_fraction * config.coherence));
    if (n_pilots < 1)
      throw std::invalid_argument("pilot_fraction yields zero pilots per window");
    if (n_pilots >= config.coherence)
      throw std::invalid_argument("pilot_fraction leaves no data symbols");
  }

  std::vector<BlockResult> results(blocks);
  std::atomic<int> next{0};
  auto work = [&]() {
    for (int b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
      try {
        results[b] = run_block(config, precoder, noise_var, mode, seed, b, cons,
                               alphabet, epsilon, n_pilots);
      } catch (const std::exception& e) {
        results[b].error = e.what();
      }
    }
  };

  int n_threads = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, blocks));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  for (int b = 0; b < blocks; ++b)
    if (!results[b].error.empty())
      throw std::runtime_error("block " + std::to_string(b) + ": " + results[b].error);

  // Deterministic reduction in block order, independent of worker scheduling.
  GmiReport report;
  report.blocks = blocks;
  report.mode = mode;
  report.pilot_fraction =
      mode == EstimationMode::Pat
          ? static_cast<double>(n_pilots) / static_cast<double>(config.coherence)
          : 0.0;
  report.per_ue_rates.assign(config.n_ue, 0.0);
  report.raw_block_rates.reserve(blocks);
  double alpha_sum = 0.0;
  long long alpha_count = 0;
  for (int b = 0; b < blocks; ++b) {
    const BlockResult& r = results[b];
    report.raw_block_rates.push_back(r.rates);
    for (int k = 0; k < config.n_ue; ++k)
      report.per_ue_rates[k] += std::max(0.0, r.rates[k]);
    alpha_sum += r.alpha_sum;
    alpha_count += r.alpha_count;
    report.ops += r.ops;
    report.invocations += r.invocations;
  }
  for (double& r : report.per_ue_rates) r /= blocks;
  report.mean_rate = 0.0;
  for (double r : report.per_ue_rates) report.mean_rate += r;
  report.mean_rate /= config.n_ue;
  report.alpha_mean = alpha_count > 0 ? alpha_sum / alpha_count : 0.0;
  return report;
}

}  // namespace qprec

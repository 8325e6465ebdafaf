// SPDX-License-Identifier: Apache-2.0
#include "qprec/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qprec/channel.hpp"
#include "qprec/ofdm.hpp"
#include "qprec/precode.hpp"
#include "qprec/rng.hpp"

namespace qprec {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

bool is_descent_precoder(const std::string& name) {
  return name == "qcm" || name == "magiq";
}

/// Error text destined for a CSV cell: no commas, no line breaks.
std::string sanitize_status(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Average per-iteration multiplication count of one precoder at the given
/// dimensions, over `instances` random channel/data draws.
double measure_count(const std::string& precoder, const SystemConfig& cfg, int n_tx,
                     int n_ue, int t_f, int t_c, int n_taps, int instances,
                     std::uint64_t seed_tag) {
  const Constellation cons = Constellation::named(cfg.constellation);
  const TxAlphabet alphabet = TxAlphabet::make(cfg.power_budget, n_tx, cfg.phase_bits);
  const double noise_var = cfg.power_budget * std::pow(10.0, -1.2);  // 12 dB point
  const int iters = std::min(std::max(cfg.iters, 1), 3);

  double total = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    const std::uint64_t block = seed_tag * 1000 + static_cast<std::uint64_t>(inst);
    rng::Substream ch_rs(cfg.master_seed, rng::Stream::Channel, block);
    rng::Substream data_rs(cfg.master_seed, rng::Stream::Data, block);
    const TapChannel ch = draw_rayleigh(n_tx, n_ue, n_taps, ch_rs);
    const MatrixXcd u_freq = draw_data(cons, n_ue, t_f, data_rs);
    const OfdmFrame frame = make_frame(u_freq, t_c);

    if (precoder == "qcm") {
      PrecodeResult pr = precode_qcm(frame, ch, alphabet, iters, Schedule::RoundRobin,
                                     noise_var);
      total += static_cast<double>(pr.ops.iter) / iters;
    } else if (precoder == "magiq") {
      PrecodeResult pr = precode_magiq(frame, ch, alphabet, iters, noise_var);
      total += static_cast<double>(pr.ops.iter) / iters;
    } else if (precoder == "qlp-zf") {
      const PrecodeResult pr = precode_qlp_zf(frame, ch, alphabet, noise_var);
      total += static_cast<double>(pr.ops.total());
    } else if (precoder == "lp-zf" || precoder == "lp-mmse") {
      const FreqChannel fc = frequency_response(ch, t_f);
      const double wvar = (precoder == "lp-mmse") ? noise_var : 0.0;
      OpCounter wops;
      const std::vector<MatrixXcd> weights =
          lmmse_weights(fc, cfg.power_budget, wvar, &wops.weights);
      PrecodeResult pr = linear_precode(u_freq, weights, t_c, cfg.power_budget);
      pr.ops += wops;
      total += static_cast<double>(pr.ops.total());
    } else {
      throw std::runtime_error("unknown precoder \"" + precoder + "\"");
    }
  }
  return total / instances;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SystemConfig& cfg, int workers) {
  const std::string hash = config_hash(cfg);
  std::vector<SweepRow> rows;
  rows.reserve(cfg.precoders.size() * cfg.epsilon_grid.size() * cfg.snr_grid_db.size());

  for (const std::string& precoder : cfg.precoders) {
    for (double eps : cfg.epsilon_grid) {
      SystemConfig point = cfg;
      point.epsilon_grid = {eps};
      for (double snr_db : cfg.snr_grid_db) {
        SweepRow row;
        row.config_hash = hash;
        row.precoder = precoder;
        row.snr_db = snr_db;
        row.epsilon = eps;
        row.iters = is_descent_precoder(precoder) ? cfg.iters : 1;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const GmiReport rep = evaluate_system(point, precoder, snr_db, cfg.blocks,
                                                cfg.mode, cfg.master_seed, workers);
          row.mean_rate = rep.mean_rate;
          row.per_ue_rates = rep.per_ue_rates;
          row.alpha_mean = rep.alpha_mean;
          const double inv = static_cast<double>(rep.invocations);
          row.mults_per_iter = is_descent_precoder(precoder)
                                   ? static_cast<double>(rep.ops.iter) / (cfg.iters * inv)
                                   : static_cast<double>(rep.ops.total()) / inv;
        } catch (const std::exception& e) {
          row.mean_rate = kNan;
          row.per_ue_rates.assign(static_cast<std::size_t>(cfg.n_ue), kNan);
          row.alpha_mean = kNan;
          row.mults_per_iter = kNan;
          row.status = sanitize_status(e.what());
        }
        row.seconds = elapsed_seconds(t0);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string sweep_csv(const SystemConfig& cfg, const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "precoder,snr_db,epsilon,mean_rate_bpcu";
  for (int k = 0; k < cfg.n_ue; ++k) out << ",rate_ue_" << k;
  out << ",alpha_mean,mults_per_iter,iters,seconds,status\n";
  for (const SweepRow& row : rows) {
    out << row.precoder << ',' << format_double(row.snr_db) << ','
        << format_double(row.epsilon) << ',' << format_double(row.mean_rate);
    for (int k = 0; k < cfg.n_ue; ++k) {
      const double r = k < static_cast<int>(row.per_ue_rates.size())
                           ? row.per_ue_rates[static_cast<std::size_t>(k)]
                           : kNan;
      out << ',' << format_double(r);
    }
    out << ',' << format_double(row.alpha_mean) << ','
        << format_double(row.mults_per_iter) << ',' << row.iters << ','
        << format_double(row.seconds) << ',' << row.status << '\n';
  }
  return out.str();
}

void write_sweep_csv(const std::string& path, const SystemConfig& cfg,
                     const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file \"" + path + "\"");
  out << sweep_csv(cfg, rows);
  if (!out) throw std::runtime_error("failed writing \"" + path + "\"");
}

std::vector<ComplexityRow> report_complexity(const SystemConfig& cfg,
                                             const std::vector<std::string>& precoders,
                                             int instances) {
  if (instances < 1) throw std::invalid_argument("instances must be >= 1");

  struct Experiment {
    const char* param;
    int n_tx, n_ue, t_f, t_c, n_taps;   // baseline dims
    int d_n_tx, d_n_ue, d_t_f, d_n_taps;  // doubled dims (t_c held fixed)
    double expected;
  };
  // The L experiment pins t_c = 2L - 1 on both sides so the doubled channel
  // still fits the cyclic prefix without changing the block length.
  const int tc_l = 2 * cfg.n_taps - 1;
  const std::vector<Experiment> experiments = {
      {"T", cfg.n_tx, cfg.n_ue, cfg.t_f, cfg.t_c, cfg.n_taps, cfg.n_tx, cfg.n_ue,
       2 * cfg.t_f, cfg.n_taps,
       static_cast<double>(2 * cfg.t_f + cfg.t_c) / (cfg.t_f + cfg.t_c)},
      {"N", cfg.n_tx, cfg.n_ue, cfg.t_f, cfg.t_c, cfg.n_taps, 2 * cfg.n_tx, cfg.n_ue,
       cfg.t_f, cfg.n_taps, 2.0},
      {"K", cfg.n_tx, cfg.n_ue, cfg.t_f, cfg.t_c, cfg.n_taps, cfg.n_tx, 2 * cfg.n_ue,
       cfg.t_f, cfg.n_taps, 2.0},
      {"L", cfg.n_tx, cfg.n_ue, cfg.t_f, tc_l, cfg.n_taps, cfg.n_tx, cfg.n_ue, cfg.t_f,
       2 * cfg.n_taps, 2.0},
  };

  std::vector<ComplexityRow> rows;
  std::uint64_t tag = 1;
  for (const std::string& precoder : precoders) {
    for (const Experiment& ex : experiments) {
      ComplexityRow row;
      row.precoder = precoder;
      row.param = ex.param;
      row.expected_ratio = ex.expected;
      try {
        row.base_count = measure_count(precoder, cfg, ex.n_tx, ex.n_ue, ex.t_f, ex.t_c,
                                       ex.n_taps, instances, tag);
        row.doubled_count = measure_count(precoder, cfg, ex.d_n_tx, ex.d_n_ue, ex.d_t_f,
                                          ex.t_c, ex.d_n_taps, instances, tag + 1);
        row.measured_ratio = row.doubled_count / row.base_count;
        row.deviation = std::abs(row.measured_ratio / row.expected_ratio - 1.0);
      } catch (const std::exception&) {
        row.base_count = row.doubled_count = kNan;
        row.measured_ratio = row.deviation = kNan;
      }
      tag += 2;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string complexity_csv(const std::vector<ComplexityRow>& rows) {
  std::ostringstream out;
  out << "precoder,param,base_count,doubled_count,measured_ratio,expected_ratio,"
         "deviation\n";
  for (const ComplexityRow& row : rows) {
    out << row.precoder << ',' << row.param << ',' << format_double(row.base_count)
        << ',' << format_double(row.doubled_count) << ','
        << format_double(row.measured_ratio) << ',' << format_double(row.expected_ratio)
        << ',' << format_double(row.deviation) << '\n';
  }
  return out.str();
}

std::string complexity_table(const std::vector<ComplexityRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %-5s %16s %16s %10s %10s %10s\n", "precoder",
                "param", "base", "doubled", "measured", "expected", "deviation");
  out << line;
  for (const ComplexityRow& row : rows) {
    std::snprintf(line, sizeof(line), "%-8s %-5s %16.0f %16.0f %10.4f %10.4f %9.2f%%\n",
                  row.precoder.c_str(), row.param.c_str(), row.base_count,
                  row.doubled_count, row.measured_ratio, row.expected_ratio,
                  100.0 * row.deviation);
    out << line;
  }
  out << "\nratios are per-iteration multiplication counts (doubled / base);\n"
         "the linear scaling law applies to the coordinate-minimization precoders.\n";
  return out.str();
}

std::vector<AlphaRow> alpha_diagnostics(const SystemConfig& cfg, int workers) {
  std::string precoder;
  for (const std::string& name : cfg.precoders) {
    if (is_descent_precoder(name)) {
      precoder = name;
      break;
    }
  }
  if (precoder.empty()) {
    throw std::runtime_error(
        "alpha diagnostics need a qcm or magiq precoder in the config");
  }
  SystemConfig point = cfg;
  point.epsilon_grid = {cfg.epsilon_grid.front()};

  std::vector<AlphaRow> rows;
  rows.reserve(cfg.snr_grid_db.size());
  for (double snr_db : cfg.snr_grid_db) {
    AlphaRow row;
    row.snr_db = snr_db;
    row.alpha_precoder_mean = evaluate_system(point, precoder, snr_db, cfg.blocks,
                                              cfg.mode, cfg.master_seed, workers)
                                  .alpha_mean;
    row.alpha_wf_mean = evaluate_system(point, "lp-mmse", snr_db, cfg.blocks, cfg.mode,
                                        cfg.master_seed, workers)
                            .alpha_mean;
    rows.push_back(row);
  }
  return rows;
}

std::string alpha_csv(const SystemConfig& cfg, const std::vector<AlphaRow>& rows) {
  std::string precoder = "qcm";
  for (const std::string& name : cfg.precoders) {
    if (is_descent_precoder(name)) {
      precoder = name;
      break;
    }
  }
  std::ostringstream out;
  out << "snr_db,alpha_" << precoder << "_mean,alpha_wf_mean\n";
  for (const AlphaRow& row : rows) {
    out << format_double(row.snr_db) << ',' << format_double(row.alpha_precoder_mean)
        << ',' << format_double(row.alpha_wf_mean) << '\n';
  }
  return out.str();
}

void write_alpha_csv(const std::string& path, const SystemConfig& cfg,
                     const std::vector<AlphaRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file \"" + path + "\"");
  out << alpha_csv(cfg, rows);
  if (!out) throw std::runtime_error("failed writing \"" + path + "\"");
}

}  // namespace qprec

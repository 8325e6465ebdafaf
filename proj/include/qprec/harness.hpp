// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "qprec/config.hpp"
#include "qprec/rate_eval.hpp"

namespace qprec {

/// One evaluated (precoder, SNR, epsilon) point of a sweep. Failed points
/// carry the error in `status` and NaN rates; the sweep continues past them.
struct SweepRow {
  std::string config_hash;
  std::string precoder;
  double snr_db = 0.0;
  double epsilon = 0.0;
  double mean_rate = 0.0;
  std::vector<double> per_ue_rates;
  double alpha_mean = 0.0;
  double mults_per_iter = 0.0;
  int iters = 0;
  double seconds = 0.0;
  std::string status = "ok";
};

/// Evaluates every precoder at every (epsilon, SNR) grid point of the config.
/// Rows are deterministic under a fixed master seed; only the wall-clock
/// seconds field varies between runs.
std::vector<SweepRow> run_sweep(const SystemConfig& cfg, int workers = 0);

/// CSV schema: precoder, snr_db, epsilon, mean_rate_bpcu, rate_ue_0..,
/// alpha_mean, mults_per_iter, iters, seconds, status.
std::string sweep_csv(const SystemConfig& cfg, const std::vector<SweepRow>& rows);
void write_sweep_csv(const std::string& path, const SystemConfig& cfg,
                     const std::vector<SweepRow>& rows);

/// One doubling experiment: per-iteration multiplication count at the config
/// dimensions and with one dimension doubled, against the ratio a linear
/// scaling law predicts.
struct ComplexityRow {
  std::string precoder;
  std::string param;  ///< "T", "N", "K", or "L"
  double base_count = 0.0;
  double doubled_count = 0.0;
  double measured_ratio = 0.0;
  double expected_ratio = 0.0;
  double deviation = 0.0;  ///< |measured/expected - 1|
};

/// Runs the T/N/K/L doubling experiments for each precoder on random
/// instances at the config dimensions, averaging counts over `instances`
/// draws. The L experiment fixes t_c = 2L - 1 on both sides so the doubled
/// channel still fits the prefix.
std::vector<ComplexityRow> report_complexity(const SystemConfig& cfg,
                                             const std::vector<std::string>& precoders,
                                             int instances = 3);

std::string complexity_csv(const std::vector<ComplexityRow>& rows);
std::string complexity_table(const std::vector<ComplexityRow>& rows);

/// Converged alpha of the configured coordinate-minimization precoder vs the
/// Wiener-filter alpha of the linear MMSE precoder, on the same channels.
struct AlphaRow {
  double snr_db = 0.0;
  double alpha_precoder_mean = 0.0;
  double alpha_wf_mean = 0.0;
};

/// Requires the config's first precoder to be qcm or magiq. One row per SNR
/// grid point, at the first epsilon of the grid.
std::vector<AlphaRow> alpha_diagnostics(const SystemConfig& cfg, int workers = 0);

std::string alpha_csv(const SystemConfig& cfg, const std::vector<AlphaRow>& rows);
void write_alpha_csv(const std::string& path, const SystemConfig& cfg,
                     const std::vector<AlphaRow>& rows);

}  // namespace qprec

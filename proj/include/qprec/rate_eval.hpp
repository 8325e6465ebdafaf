// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qprec/config.hpp"
#include "qprec/ofdm.hpp"
#include "qprec/types.hpp"

namespace qprec {

/// Lower clamp for the estimated auxiliary noise variance; the ML formula
/// yields exactly zero on noiseless inputs and the GMI needs a positive value.
inline constexpr double kNoiseVarFloor = 1e-12;

/// Gaussian auxiliary channel q(y|x) ~ exp(-|y - gain x|^2 / noise_var),
/// raised to `exponent` (s) inside the GMI.
struct AuxChannelParams {
  cxd gain{0.0, 0.0};
  double noise_var = kNoiseVarFloor;
  double exponent = 1.0;
};

/// Joint ML estimates over the given index set:
///   gain = sum y x* / sum |x|^2,   noise_var = (1/|set|) sum |y - gain x|^2
/// (clamped at kNoiseVarFloor). The set is the pilot set for PAT and all
/// indices for data-aided estimation. Throws when the set is empty or its
/// transmit energy is zero.
AuxChannelParams estimate_params(const VectorXcd& tx, const VectorXcd& rx,
                                 const std::vector<int>& estimation_set);

/// Per-block GMI in bits per channel use. Symbols listed in `excluded_set`
/// (the pilots) are left out of the sum, but the normalization stays 1/S, so
/// pilot overhead automatically reduces the rate. tx entries are the
/// transmitted constellation points; priors are uniform.
double gmi_rate(const VectorXcd& tx, const VectorXcd& rx, const AuxChannelParams& params,
                const Constellation& constellation, const std::vector<int>& excluded_set);

/// Grid search over the auxiliary exponent s; returns (best s, best rate).
/// The default pipeline fixes s = 1, which the search confirms is near-optimal
/// when the parameters come from estimate_params.
std::pair<double, double> optimize_s(const VectorXcd& tx, const VectorXcd& rx,
                                     const AuxChannelParams& params,
                                     const Constellation& constellation,
                                     const std::vector<int>& excluded_set,
                                     const std::vector<double>& grid);

/// Monte-Carlo rate summary over B independent channel blocks.
struct GmiReport {
  int blocks = 0;
  EstimationMode mode = EstimationMode::DataAided;
  double pilot_fraction = 0.0;  ///< realized S_p / S (0 for data-aided)
  std::vector<double> per_ue_rates;  ///< per-UE mean of per-block rates clamped at 0
  double mean_rate = 0.0;            ///< mean of per_ue_rates
  std::vector<std::vector<double>> raw_block_rates;  ///< B x K, unclamped
  double alpha_mean = 0.0;  ///< precoder alpha averaged over all invocations
  int invocations = 0;      ///< precode calls (blocks x OFDM symbols)
  OpCounter ops;            ///< summed over all invocations
};

/// Runs `blocks` end-to-end Monte-Carlo blocks for one precoder at one SNR:
/// draw channel, corrupt CSI per the config epsilon, precode every OFDM
/// symbol in the coherence window, pass through the true channel with noise,
/// estimate per-UE auxiliary parameters, and accumulate GMI rates. Blocks run
/// in parallel on `workers` threads (0 = hardware concurrency); every random
/// draw comes from a substream keyed by (seed, purpose, block), so the result
/// is bit-identical regardless of scheduling. The config must carry exactly
/// one epsilon value; sweeps expand their grids into repeated calls.
GmiReport evaluate_system(const SystemConfig& config, const std::string& precoder,
                          double snr_db, int blocks, EstimationMode mode,
                          std::uint64_t seed, int workers = 1);

}  // namespace qprec

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qprec/precode.hpp"

namespace qprec {

/// How the receiver learns its auxiliary-channel parameters: from pilot
/// symbols only (PAT) or from the full transmitted block (data-aided).
enum class EstimationMode { DataAided, Pat };

/// One fully resolved experiment description. Presets fill in the named
/// system parameterizations; every field can be overridden by config keys.
struct SystemConfig {
  int n_tx = 32;
  int n_ue = 4;
  int t_f = 64;
  int t_c = 7;
  int n_taps = 8;
  std::string constellation = "16qam";
  int phase_bits = 2;
  std::vector<std::string> precoders = {"qcm"};
  int iters = 6;
  Schedule schedule = Schedule::RoundRobin;
  std::vector<double> snr_grid_db = {0, 4, 8, 12, 16, 20, 24, 28, 32, 36, 40};
  std::vector<double> epsilon_grid = {0.0};
  int blocks = 50;
  int coherence = 256;  ///< S, symbols per channel realization; multiple of t_f
  double pilot_fraction = 0.1;
  EstimationMode mode = EstimationMode::DataAided;
  std::uint64_t master_seed = 1;
  double power_budget = 1.0;

  int block_len() const { return t_f + t_c; }
  int symbols_per_block() const { return t_f > 0 ? coherence / t_f : 0; }
};

/// Known precoder names: lp-zf, lp-mmse, qlp-zf, qcm, magiq.
bool is_known_precoder(const std::string& name);

/// Named baseline parameterizations: system-a, system-b, system-c-rayleigh,
/// and the desk-scale system-a-mini.
SystemConfig preset_config(const std::string& name);

/// Parse flat "key = value" text ('#' comments, blank lines allowed). A
/// "preset" key must come first; later keys override preset fields. Unknown
/// keys are errors. The result is validated.
SystemConfig parse_config(const std::string& text);
SystemConfig load_config(const std::string& path);

/// Throws std::invalid_argument naming the offending field when any invariant
/// is violated (e.g. t_c < n_taps - 1).
void validate_config(const SystemConfig& cfg);

/// Canonical key = value rendering; parse_config(describe_config(c)) == c.
std::string describe_config(const SystemConfig& cfg);

/// FNV-1a hash of the canonical rendering, as 16 hex digits.
std::string config_hash(const SystemConfig& cfg);

std::string to_string(Schedule s);
std::string to_string(EstimationMode m);

/// Shortest round-trip decimal rendering of a double (used everywhere a
/// number is serialized, so output files are byte-stable).
std::string format_double(double v);

}  // namespace qprec

// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qprec/config.hpp"
#include "qprec/harness.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  std::string out;
  std::string mode;
};

void add_common_options(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--config", opts->config_path, "Path to a key = value config file");
  cmd->add_option("--preset", opts->preset,
                  "Built-in preset (system-a, system-b, system-c-rayleigh, "
                  "system-a-mini)");
  cmd->add_option("--seed", opts->seed, "Master seed override")
      ->each([opts](const std::string&) { opts->seed_set = true; });
  cmd->add_option("--workers", opts->workers,
                  "Worker threads (0 = all hardware threads)");
  cmd->add_option("--out", opts->out, "Output file path");
  cmd->add_option("--mode", opts->mode, "Estimation mode override")
      ->check(CLI::IsMember({"pat", "data-aided"}));
}

qprec::SystemConfig build_config(const CommonOpts& opts) {
  if (!opts.config_path.empty() && !opts.preset.empty()) {
    throw std::runtime_error("pass either --config or --preset, not both");
  }
  if (opts.config_path.empty() && opts.preset.empty()) {
    throw std::runtime_error("a config is required: pass --config or --preset");
  }
  qprec::SystemConfig cfg = opts.config_path.empty()
                                ? qprec::preset_config(opts.preset)
                                : qprec::load_config(opts.config_path);
  if (opts.seed_set) cfg.master_seed = opts.seed;
  if (opts.mode == "pat") cfg.mode = qprec::EstimationMode::Pat;
  if (opts.mode == "data-aided") cfg.mode = qprec::EstimationMode::DataAided;
  qprec::validate_config(cfg);
  return cfg;
}

int run_sweep_cmd(const CommonOpts& opts) {
  const qprec::SystemConfig cfg = build_config(opts);
  const std::string out = opts.out.empty() ? "sweep.csv" : opts.out;
  const std::vector<qprec::SweepRow> rows = qprec::run_sweep(cfg, opts.workers);
  qprec::write_sweep_csv(out, cfg, rows);
  int failures = 0;
  for (const qprec::SweepRow& row : rows) {
    if (row.status != "ok") {
      ++failures;
      std::cerr << "warning: " << row.precoder << " @ " << row.snr_db
                << " dB, epsilon " << row.epsilon << ": " << row.status << "\n";
    }
  }
  std::cout << rows.size() << " rows (" << failures << " failed) -> " << out << "\n";
  return failures == static_cast<int>(rows.size()) && !rows.empty() ? 1 : 0;
}

int run_complexity_cmd(const CommonOpts& opts) {
  const qprec::SystemConfig cfg = build_config(opts);
  const std::vector<qprec::ComplexityRow> rows =
      qprec::report_complexity(cfg, cfg.precoders);
  std::cout << qprec::complexity_table(rows);
  if (!opts.out.empty()) {
    std::ofstream f(opts.out);
    if (!f) throw std::runtime_error("cannot open output file \"" + opts.out + "\"");
    f << qprec::complexity_csv(rows);
    std::cout << "wrote " << opts.out << "\n";
  }
  return 0;
}

int run_alpha_cmd(const CommonOpts& opts) {
  const qprec::SystemConfig cfg = build_config(opts);
  const std::string out = opts.out.empty() ? "alpha.csv" : opts.out;
  const std::vector<qprec::AlphaRow> rows = qprec::alpha_diagnostics(cfg, opts.workers);
  qprec::write_alpha_csv(out, cfg, rows);
  std::cout << rows.size() << " rows -> " << out << "\n";
  return 0;
}

int run_validate_cmd(const CommonOpts& opts) {
  const qprec::SystemConfig cfg = build_config(opts);
  std::cout << qprec::describe_config(cfg);
  std::cout << "config_hash = " << qprec::config_hash(cfg) << "\n";
  std::cout << "ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link-level simulator for low-resolution precoding in multiuser OFDM"};
  app.require_subcommand(1);

  CommonOpts opts;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Evaluate achievable rates over the configured SNR/epsilon grid");
  CLI::App* complexity = app.add_subcommand(
      "complexity", "Run the per-iteration multiplication-count doubling experiments");
  CLI::App* alpha = app.add_subcommand(
      "alpha", "Compare converged precoding gains against the Wiener-filter gain");
  CLI::App* validate = app.add_subcommand(
      "validate-config", "Parse and validate a config, then print its canonical form");
  for (CLI::App* cmd : {sweep, complexity, alpha, validate}) {
    add_common_options(cmd, &opts);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return run_sweep_cmd(opts);
    if (complexity->parsed()) return run_complexity_cmd(opts);
    if (alpha->parsed()) return run_alpha_cmd(opts);
    if (validate->parsed()) return run_validate_cmd(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

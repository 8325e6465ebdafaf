// SPDX-License-Identifier: Apache-2.0
// Python bindings for the main operations: channel generation, OFDM
// transforms, the precoders and the Monte-Carlo rate evaluation. Matrices
// cross the boundary as numpy arrays via pybind11's Eigen support.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qprec/channel.hpp"
#include "qprec/config.hpp"
#include "qprec/harness.hpp"
#include "qprec/ofdm.hpp"
#include "qprec/precode.hpp"
#include "qprec/rate_eval.hpp"

namespace py = pybind11;
using namespace qprec;

namespace {

TapChannel channel_from_taps(const std::vector<MatrixXcd>& taps) {
  if (taps.empty()) throw std::invalid_argument("taps must be non-empty");
  TapChannel ch;
  ch.taps = taps;
  return ch;
}

Schedule schedule_from_string(const std::string& name) {
  if (name == "round-robin") return Schedule::RoundRobin;
  if (name == "random") return Schedule::RandomPermutation;
  throw std::invalid_argument("schedule must be round-robin or random");
}

EstimationMode mode_from_string(const std::string& name) {
  if (name == "data-aided") return EstimationMode::DataAided;
  if (name == "pat") return EstimationMode::Pat;
  throw std::invalid_argument("mode must be pat or data-aided");
}

py::dict result_to_dict(const PrecodeResult& pr) {
  py::dict d;
  d["x"] = pr.x;
  d["alpha"] = pr.alpha;
  d["cost"] = pr.cost;
  d["iterations"] = pr.iterations;
  d["mults"] = pr.ops.total();
  return d;
}

py::dict report_to_dict(const GmiReport& rep) {
  py::dict d;
  d["mean_rate_bpcu"] = rep.mean_rate;
  d["per_ue_rates"] = rep.per_ue_rates;
  d["raw_block_rates"] = rep.raw_block_rates;
  d["alpha_mean"] = rep.alpha_mean;
  d["blocks"] = rep.blocks;
  d["invocations"] = rep.invocations;
  d["pilot_fraction"] = rep.pilot_fraction;
  d["mults"] = rep.ops.total();
  return d;
}

}  // namespace

PYBIND11_MODULE(pyqprec, m) {
  m.doc() = "Low-resolution multiuser OFDM precoding: channels, precoders and "
            "achievable-rate evaluation";

  m.def("draw_rayleigh",
        [](int n_tx, int n_ue, int n_taps, std::uint64_t seed) {
          return draw_rayleigh(n_tx, n_ue, n_taps, seed).taps;
        },
        py::arg("n_tx"), py::arg("n_ue"), py::arg("n_taps"), py::arg("seed"),
        "i.i.d. Rayleigh taps with uniform delay profile, as a list of K x N "
        "arrays");

  m.def("frequency_response",
        [](const std::vector<MatrixXcd>& taps, int t_f) {
          return frequency_response(channel_from_taps(taps), t_f).per_subcarrier;
        },
        py::arg("taps"), py::arg("t_f"),
        "Per-subcarrier response of a tap list, as T_F matrices of size K x N");

  m.def("corrupt_csi",
        [](const std::vector<MatrixXcd>& taps, double epsilon, std::uint64_t seed) {
          return corrupt_csi(channel_from_taps(taps), epsilon, seed).taps;
        },
        py::arg("taps"), py::arg("epsilon"), py::arg("seed"),
        "Channel estimate under CSI error epsilon; epsilon 0 returns the taps "
        "unchanged");

  m.def("apply_channel",
        [](const std::vector<MatrixXcd>& taps, const MatrixXcd& x, double noise_var,
           std::uint64_t seed) {
          NoiseSpec noise;
          noise.variance = noise_var;
          noise.seed = seed;
          return apply_channel(channel_from_taps(taps), x, noise);
        },
        py::arg("taps"), py::arg("x"), py::arg("noise_var"), py::arg("seed"),
        "y[t] = sum_tau H[tau] x[t - tau] + z[t] with zero pre-block history");

  m.def("save_taps",
        [](const std::string& path, const std::vector<MatrixXcd>& taps) {
          save_taps(path, channel_from_taps(taps));
        },
        py::arg("path"), py::arg("taps"),
        "Writes a tap list in the textual qprec-taps v1 format");

  m.def("load_taps",
        [](const std::string& path) { return load_taps(path).taps; },
        py::arg("path"), "Reads a qprec-taps v1 file back into a tap list");

  m.def("constellation_points",
        [](const std::string& name) { return Constellation::named(name).points; },
        py::arg("name"),
        "Unit-energy points of qpsk, 4psk, 8psk, 16psk, 32psk, 16qam or 64qam");

  m.def("draw_data",
        [](const std::string& constellation, int n_ue, int t_f, std::uint64_t seed) {
          return draw_data(Constellation::named(constellation), n_ue, t_f, seed);
        },
        py::arg("constellation"), py::arg("n_ue"), py::arg("t_f"), py::arg("seed"),
        "K x T_F grid of i.i.d. uniform constellation symbols");

  m.def("to_time", &to_time, py::arg("freq"), py::arg("t_c"),
        "Row-wise scaled IDFT plus cyclic prefix of length t_c");
  m.def("from_time", &from_time, py::arg("time"), py::arg("t_f"), py::arg("t_c"),
        "Drops the prefix and applies the row-wise DFT");

  m.def("tx_alphabet",
        [](double power, int n_tx, int phase_bits) {
          return TxAlphabet::make(power, n_tx, phase_bits).points;
        },
        py::arg("power"), py::arg("n_tx"), py::arg("phase_bits"),
        "The zero symbol plus the 2^b phase ring of modulus sqrt(P/N)");

  m.def("quantize",
        [](const MatrixXcd& x, double power, int n_tx, int phase_bits) {
          return quantize(x, TxAlphabet::make(power, n_tx, phase_bits));
        },
        py::arg("x"), py::arg("power"), py::arg("n_tx"), py::arg("phase_bits"),
        "Entrywise nearest-point projection onto the transmit alphabet");

  m.def("cost_g",
        [](const MatrixXcd& x, double alpha, const std::vector<MatrixXcd>& taps,
           const MatrixXcd& target, double noise_var) {
          return cost_g(x, alpha, channel_from_taps(taps), target, noise_var);
        },
        py::arg("x"), py::arg("alpha"), py::arg("taps"), py::arg("target"),
        py::arg("noise_var"), "Block MSE cost G(x, alpha)");

  m.def("optimal_alpha",
        [](const MatrixXcd& x, const std::vector<MatrixXcd>& taps,
           const MatrixXcd& target, double noise_var) {
          return optimal_alpha(x, channel_from_taps(taps), target, noise_var);
        },
        py::arg("x"), py::arg("taps"), py::arg("target"), py::arg("noise_var"),
        "Closed-form cost-minimizing receive scaling for a fixed block");

  m.def("lmmse_weights",
        [](const std::vector<MatrixXcd>& taps, int t_f, double symbol_power,
           double noise_var) {
          return lmmse_weights(frequency_response(channel_from_taps(taps), t_f),
                               symbol_power, noise_var);
        },
        py::arg("taps"), py::arg("t_f"), py::arg("symbol_power"), py::arg("noise_var"),
        "Per-subcarrier Wiener precoding weights (zero-forcing at noise_var 0)");

  m.def("precode_qcm",
        [](const MatrixXcd& freq_data, const std::vector<MatrixXcd>& taps, int t_c,
           double power, int phase_bits, int iters, double noise_var,
           const std::string& schedule, std::uint64_t seed) {
          const TapChannel ch = channel_from_taps(taps);
          const OfdmFrame frame = make_frame(freq_data, t_c);
          const TxAlphabet alphabet = TxAlphabet::make(power, ch.n_tx(), phase_bits);
          const Schedule sched = schedule_from_string(schedule);
          rng::Substream rs(seed, rng::Stream::Schedule, 0);
          return result_to_dict(precode_qcm(frame, ch, alphabet, iters, sched,
                                            noise_var,
                                            sched == Schedule::RandomPermutation
                                                ? &rs
                                                : nullptr));
        },
        py::arg("freq_data"), py::arg("taps"), py::arg("t_c"), py::arg("power"),
        py::arg("phase_bits"), py::arg("iters"), py::arg("noise_var"),
        py::arg("schedule") = "round-robin", py::arg("seed") = 0,
        "Fixed-schedule coordinate minimization over the discrete alphabet");

  m.def("precode_magiq",
        [](const MatrixXcd& freq_data, const std::vector<MatrixXcd>& taps, int t_c,
           double power, int phase_bits, int iters, double noise_var) {
          const TapChannel ch = channel_from_taps(taps);
          const OfdmFrame frame = make_frame(freq_data, t_c);
          const TxAlphabet alphabet = TxAlphabet::make(power, ch.n_tx(), phase_bits);
          return result_to_dict(precode_magiq(frame, ch, alphabet, iters, noise_var));
        },
        py::arg("freq_data"), py::arg("taps"), py::arg("t_c"), py::arg("power"),
        py::arg("phase_bits"), py::arg("iters"), py::arg("noise_var"),
        "Greedy per-slot coordinate minimization over the discrete alphabet");

  m.def("precode_qlp_zf",
        [](const MatrixXcd& freq_data, const std::vector<MatrixXcd>& taps, int t_c,
           double power, int phase_bits, double noise_var) {
          const TapChannel ch = channel_from_taps(taps);
          const OfdmFrame frame = make_frame(freq_data, t_c);
          const TxAlphabet alphabet = TxAlphabet::make(power, ch.n_tx(), phase_bits);
          return result_to_dict(precode_qlp_zf(frame, ch, alphabet, noise_var));
        },
        py::arg("freq_data"), py::arg("taps"), py::arg("t_c"), py::arg("power"),
        py::arg("phase_bits"), py::arg("noise_var"),
        "Zero-forcing linear precoding followed by entrywise quantization");

  m.def("preset_text",
        [](const std::string& name) { return describe_config(preset_config(name)); },
        py::arg("name"),
        "Canonical key = value text of a built-in preset");

  m.def("evaluate_system",
        [](const std::string& config_text, const std::string& precoder, double snr_db,
           int blocks, const std::string& mode, std::uint64_t seed, int workers) {
          const SystemConfig cfg = parse_config(config_text);
          return report_to_dict(evaluate_system(cfg, precoder, snr_db,
                                                blocks > 0 ? blocks : cfg.blocks,
                                                mode_from_string(mode), seed, workers));
        },
        py::arg("config_text"), py::arg("precoder"), py::arg("snr_db"),
        py::arg("blocks") = 0, py::arg("mode") = "data-aided", py::arg("seed") = 1,
        py::arg("workers") = 0,
        "End-to-end Monte-Carlo GMI evaluation; blocks = 0 takes the config value");

  m.def("run_sweep_csv",
        [](const std::string& config_text, int workers) {
          const SystemConfig cfg = parse_config(config_text);
          return sweep_csv(cfg, run_sweep(cfg, workers));
        },
        py::arg("config_text"), py::arg("workers") = 0,
        "The full sweep over precoders, epsilons and SNRs, rendered as CSV");
}

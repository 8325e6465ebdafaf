// SPDX-License-Identifier: Apache-2.0
#include "qprec/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qprec/ofdm.hpp"

namespace qprec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long parse_int(const std::string& v) {
  std::size_t pos = 0;
  long long r;
  try {
    r = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an integer, got \"" + v + "\"");
  }
  if (pos != v.size()) throw std::invalid_argument("trailing characters in \"" + v + "\"");
  return r;
}

std::uint64_t parse_u64(const std::string& v) {
  std::size_t pos = 0;
  unsigned long long r;
  try {
    r = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an unsigned integer, got \"" + v + "\"");
  }
  if (pos != v.size()) throw std::invalid_argument("trailing characters in \"" + v + "\"");
  return r;
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  double r;
  try {
    r = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got \"" + v + "\"");
  }
  if (pos != v.size()) throw std::invalid_argument("trailing characters in \"" + v + "\"");
  return r;
}

std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  for (const std::string& item : split_list(v)) out.push_back(parse_double(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

void apply_key(SystemConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n_tx")
    cfg.n_tx = static_cast<int>(parse_int(value));
  else if (key == "n_ue")
    cfg.n_ue = static_cast<int>(parse_int(value));
  else if (key == "t_f")
    cfg.t_f = static_cast<int>(parse_int(value));
  else if (key == "t_c")
    cfg.t_c = static_cast<int>(parse_int(value));
  else if (key == "n_taps")
    cfg.n_taps = static_cast<int>(parse_int(value));
  else if (key == "constellation")
    cfg.constellation = value;
  else if (key == "phase_bits")
    cfg.phase_bits = static_cast<int>(parse_int(value));
  else if (key == "precoder")
    cfg.precoders = split_list(value);
  else if (key == "iters")
    cfg.iters = static_cast<int>(parse_int(value));
  else if (key == "schedule") {
    if (value == "round-robin")
      cfg.schedule = Schedule::RoundRobin;
    else if (value == "random")
      cfg.schedule = Schedule::RandomPermutation;
    else
      throw std::invalid_argument("expected round-robin or random, got \"" + value + "\"");
  } else if (key == "snr_db")
    cfg.snr_grid_db = parse_double_list(value);
  else if (key == "epsilon")
    cfg.epsilon_grid = parse_double_list(value);
  else if (key == "blocks")
    cfg.blocks = static_cast<int>(parse_int(value));
  else if (key == "coherence")
    cfg.coherence = static_cast<int>(parse_int(value));
  else if (key == "pilot_fraction")
    cfg.pilot_fraction = parse_double(value);
  else if (key == "mode") {
    if (value == "pat")
      cfg.mode = EstimationMode::Pat;
    else if (value == "data-aided")
      cfg.mode = EstimationMode::DataAided;
    else
      throw std::invalid_argument("expected pat or data-aided, got \"" + value + "\"");
  } else if (key == "master_seed")
    cfg.master_seed = parse_u64(value);
  else if (key == "power")
    cfg.power_budget = parse_double(value);
  else
    throw std::invalid_argument("unknown key \"" + key + "\"");
}

}  // namespace

bool is_known_precoder(const std::string& name) {
  static const std::set<std::string> known = {"lp-zf", "lp-mmse", "qlp-zf", "qcm", "magiq"};
  return known.count(name) != 0;
}

SystemConfig preset_config(const std::string& name) {
  SystemConfig cfg;
  if (name == "system-a") {
    cfg.n_tx = 128;
    cfg.n_ue = 16;
    cfg.t_f = 256;
    cfg.t_c = 14;
    cfg.n_taps = 15;
    cfg.constellation = "16qam";
    cfg.phase_bits = 2;
    cfg.blocks = 200;
    cfg.coherence = 256;
    cfg.iters = 6;
  } else if (name == "system-b") {
    cfg.n_tx = 64;
    cfg.n_ue = 8;
    cfg.t_f = 32;
    cfg.t_c = 3;
    cfg.n_taps = 4;
    cfg.constellation = "8psk";
    cfg.phase_bits = 2;
    cfg.blocks = 200;
    cfg.coherence = 256;
    cfg.iters = 6;
  } else if (name == "system-c-rayleigh") {
    cfg.n_tx = 80;
    cfg.n_ue = 8;
    cfg.t_f = 256;
    cfg.t_c = 21;
    cfg.n_taps = 22;
    cfg.constellation = "16qam";
    cfg.phase_bits = 2;
    cfg.blocks = 200;
    cfg.coherence = 256;
    cfg.iters = 6;
  } else if (name == "system-a-mini") {
    cfg.n_tx = 32;
    cfg.n_ue = 4;
    cfg.t_f = 64;
    cfg.t_c = 7;
    cfg.n_taps = 8;
    cfg.constellation = "16qam";
    cfg.phase_bits = 2;
    cfg.blocks = 50;
    cfg.coherence = 256;
    cfg.iters = 6;
  } else {
    throw std::invalid_argument("unknown preset \"" + name +
                                "\" (known: system-a, system-b, system-c-rayleigh, "
                                "system-a-mini)");
  }
  return cfg;
}

SystemConfig parse_config(const std::string& text) {
  SystemConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  bool any_key = false;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected \"key = value\"");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
    try {
      if (key == "preset") {
        if (any_key)
          throw std::invalid_argument("preset must be the first key so overrides win");
        cfg = preset_config(value);
      } else {
        apply_key(cfg, key, value);
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ", key \"" + key +
                                  "\": " + e.what());
    }
    any_key = true;
  }
  validate_config(cfg);
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const SystemConfig& cfg) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (cfg.n_tx < 1) fail("n_tx", "must be at least 1");
  if (cfg.n_ue < 1) fail("n_ue", "must be at least 1");
  if (cfg.n_taps < 1) fail("n_taps", "must be at least 1");
  if (cfg.t_f < cfg.n_taps)
    fail("t_f", "must be at least n_taps (= " + std::to_string(cfg.n_taps) + ")");
  if (cfg.t_c < cfg.n_taps - 1)
    fail("t_c", "must be at least n_taps - 1 (= " + std::to_string(cfg.n_taps - 1) + ")");
  if (cfg.phase_bits < 1 || cfg.phase_bits > 16) fail("phase_bits", "must be in 1..16");
  try {
    Constellation::named(cfg.constellation);
  } catch (const std::exception& e) {
    fail("constellation", e.what());
  }
  if (cfg.precoders.empty()) fail("precoder", "must name at least one precoder");
  for (const std::string& p : cfg.precoders)
    if (!is_known_precoder(p))
      fail("precoder", "unknown precoder \"" + p +
                           "\" (known: lp-zf, lp-mmse, qlp-zf, qcm, magiq)");
  if (cfg.iters < 1) fail("iters", "must be at least 1");
  if (cfg.snr_grid_db.empty()) fail("snr_db", "must list at least one SNR point");
  if (cfg.epsilon_grid.empty()) fail("epsilon", "must list at least one value");
  for (double e : cfg.epsilon_grid)
    if (!(e >= 0.0 && e <= 1.0)) fail("epsilon", "values must lie in [0, 1]");
  if (cfg.blocks < 1) fail("blocks", "must be at least 1");
  if (cfg.coherence < cfg.t_f || cfg.coherence % cfg.t_f != 0)
    fail("coherence", "must be a positive multiple of t_f (= " + std::to_string(cfg.t_f) + ")");
  if (!(cfg.pilot_fraction >= 0.0 && cfg.pilot_fraction < 1.0))
    fail("pilot_fraction", "must lie in [0, 1)");
  if (cfg.mode == EstimationMode::Pat &&
      std::llround(cfg.pilot_fraction * cfg.coherence) < 1)
    fail("pilot_fraction", "PAT needs at least one pilot symbol per coherence window");
  if (!(cfg.power_budget > 0.0)) fail("power", "must be positive");
}

std::string to_string(Schedule s) {
  return s == Schedule::RoundRobin ? "round-robin" : "random";
}

std::string to_string(EstimationMode m) {
  return m == EstimationMode::Pat ? "pat" : "data-aided";
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string describe_config(const SystemConfig& cfg) {
  auto join_doubles = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += format_double(v[i]);
    }
    return s;
  };
  std::string precoders;
  for (std::size_t i = 0; i < cfg.precoders.size(); ++i) {
    if (i) precoders += ", ";
    precoders += cfg.precoders[i];
  }
  std::ostringstream out;
  out << "n_tx = " << cfg.n_tx << "\n"
      << "n_ue = " << cfg.n_ue << "\n"
      << "t_f = " << cfg.t_f << "\n"
      << "t_c = " << cfg.t_c << "\n"
      << "n_taps = " << cfg.n_taps << "\n"
      << "constellation = " << cfg.constellation << "\n"
      << "phase_bits = " << cfg.phase_bits << "\n"
      << "precoder = " << precoders << "\n"
      << "iters = " << cfg.iters << "\n"
      << "schedule = " << to_string(cfg.schedule) << "\n"
      << "snr_db = " << join_doubles(cfg.snr_grid_db) << "\n"
      << "epsilon = " << join_doubles(cfg.epsilon_grid) << "\n"
      << "blocks = " << cfg.blocks << "\n"
      << "coherence = " << cfg.coherence << "\n"
      << "pilot_fraction = " << format_double(cfg.pilot_fraction) << "\n"
      << "mode = " << to_string(cfg.mode) << "\n"
      << "master_seed = " << cfg.master_seed << "\n"
      << "power = " << format_double(cfg.power_budget) << "\n";
  return out.str();
}

std::string config_hash(const SystemConfig& cfg) {
  const std::string text = describe_config(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  for (int i = 15; i >= 0; --i) {
    buf[i] = "0123456789abcdef"[h & 0xF];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace qprec

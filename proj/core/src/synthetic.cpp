#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "cobb/dataset.hpp"
#include "cobb/error.hpp"
#include "cobb/report.hpp"
#include "cobb/rng.hpp"

namespace cobb {

namespace {

struct Harmonic {
  int order;
  double weight;
  double phase;
};

// Per-signal waveform recipe: value = offset(theta) + amplitude(theta) *
// sum_h w_h sin(2 pi h t / T + phi_h) + noise. Offsets keep every channel
// positive over the 15-66 degree range; amplitude slopes are distinct per
// channel and strictly positive, so severity grows every amplitude-driven
// statistic.
struct SignalRecipe {
  double offset0, offset_slope;
  double amp0, amp_slope;
  std::vector<Harmonic> harmonics;
};

const SignalRecipe& recipe_for(EffortSignalKind kind) {
  static const SignalRecipe ml_force{
      200.0, 2.0, 10.0, 0.8, {{1, 1.0, 0.0}, {2, 0.35, 0.7}}};
  static const SignalRecipe ap_torque{
      30.0, 0.5, 2.0, 0.25, {{1, 1.0, 0.3}, {2, 0.5, 1.1}, {3, 0.2, 2.0}}};
  static const SignalRecipe ml_torque{
      15.0, 0.3, 1.0, 0.15, {{1, 1.0, 1.5}, {3, 0.3, 0.4}}};
  switch (kind) {
    case EffortSignalKind::ml_force: return ml_force;
    case EffortSignalKind::ap_torque: return ap_torque;
    case EffortSignalKind::ml_torque: return ml_torque;
  }
  return ml_force;
}

std::string participant_id(int index, int total) {
  int width = 2;
  for (int n = total; n >= 100; n /= 10) ++width;
  std::string digits = std::to_string(index + 1);
  std::string id = "P";
  id.append(static_cast<std::size_t>(width) - std::min<std::size_t>(
                static_cast<std::size_t>(width), digits.size()),
            '0');
  id += digits;
  return id;
}

}  // namespace

void check_config(const SyntheticConfig& cfg) {
  if (cfg.n_participants < 2)
    throw Error(errc::config, "n_participants must be >= 2");
  if (cfg.cycles < 1) throw Error(errc::config, "cycles must be >= 1");
  if (cfg.samples_per_cycle < 8)
    throw Error(errc::config, "samples_per_cycle must be >= 8");
  if (!(cfg.angle_min_deg < cfg.angle_max_deg))
    throw Error(errc::config, "angle_min_deg must be < angle_max_deg");
  if (!(cfg.angle_min_deg > 0.0))
    throw Error(errc::config, "angle_min_deg must be positive");
  if (cfg.noise_std < 0.0) throw Error(errc::config, "noise_std must be >= 0");
}

Dataset synthesize_dataset(const SyntheticConfig& cfg) {
  check_config(cfg);
  Dataset d;
  d.cycles_per_participant = cfg.cycles;
  d.participants.resize(static_cast<std::size_t>(cfg.n_participants));

  const int T = cfg.samples_per_cycle;
  for (int i = 0; i < cfg.n_participants; ++i) {
    // Each participant consumes its own derived stream: the angle first,
    // then one normal per (signal, cycle, sample) when noise is on. This
    // keeps participants independent, so generation may run in parallel.
    Rng rng(participant_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    const double theta =
        rng.next_uniform(cfg.angle_min_deg, cfg.angle_max_deg);

    auto& p = d.participants[static_cast<std::size_t>(i)];
    p.id = participant_id(i, cfg.n_participants);
    p.cobb_angle_deg = theta;

    for (EffortSignalKind kind : kSignalKinds) {
      const SignalRecipe& r = recipe_for(kind);
      const double offset = r.offset0 + r.offset_slope * theta;
      const double amplitude = r.amp0 + r.amp_slope * theta;
      auto& cycles = p.signal(kind);
      cycles.resize(static_cast<std::size_t>(cfg.cycles));
      for (int c = 0; c < cfg.cycles; ++c) {
        auto& series = cycles[static_cast<std::size_t>(c)];
        series.cycle_index = c;
        series.samples.resize(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) {
          double wave = 0.0;
          for (const Harmonic& h : r.harmonics) {
            wave += h.weight *
                    std::sin(2.0 * std::numbers::pi * h.order * t / T + h.phase);
          }
          double v = offset + amplitude * wave;
          if (cfg.noise_std > 0.0) v += cfg.noise_std * rng.next_normal();
          series.samples[static_cast<std::size_t>(t)] = v;
        }
      }
    }
  }
  return d;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SyntheticConfig parse_synthetic_config(const std::string& text) {
  SyntheticConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(errc::config, "line " + std::to_string(line_no) +
                                    ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw Error(errc::config,
                  "line " + std::to_string(line_no) + ": repeated key '" + key +
                      "'");
    }
    try {
      if (key == "n_participants") {
        cfg.n_participants = std::stoi(value);
      } else if (key == "cycles") {
        cfg.cycles = std::stoi(value);
      } else if (key == "samples_per_cycle") {
        cfg.samples_per_cycle = std::stoi(value);
      } else if (key == "angle_min_deg") {
        cfg.angle_min_deg = std::stod(value);
      } else if (key == "angle_max_deg") {
        cfg.angle_max_deg = std::stod(value);
      } else if (key == "noise_std") {
        cfg.noise_std = std::stod(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else {
        throw Error(errc::config, "line " + std::to_string(line_no) +
                                      ": unknown key '" + key + "'");
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(errc::config, "line " + std::to_string(line_no) +
                                    ": invalid value '" + value + "' for '" +
                                    key + "'");
    }
  }
  check_config(cfg);
  return cfg;
}

std::string serialize_synthetic_config(const SyntheticConfig& cfg) {
  std::string out;
  out += "n_participants = " + std::to_string(cfg.n_participants) + "\n";
  out += "cycles = " + std::to_string(cfg.cycles) + "\n";
  out += "samples_per_cycle = " + std::to_string(cfg.samples_per_cycle) + "\n";
  out += "angle_min_deg = " + format_double(cfg.angle_min_deg) + "\n";
  out += "angle_max_deg = " + format_double(cfg.angle_max_deg) + "\n";
  out += "noise_std = " + format_double(cfg.noise_std) + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  return out;
}

}  // namespace cobb

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cobb {

/// The three lumbosacral effort channels fed to the models: mediolateral
/// force (N), anteroposterior torque (N.m), mediolateral torque (N.m).
enum class EffortSignalKind { ml_force = 0, ap_torque = 1, ml_torque = 2 };

inline constexpr int kSignalKindCount = 3;

inline constexpr std::array<EffortSignalKind, kSignalKindCount> kSignalKinds = {
    EffortSignalKind::ml_force, EffortSignalKind::ap_torque,
    EffortSignalKind::ml_torque};

const char* signal_kind_name(EffortSignalKind kind);

/// Returns true and sets `out` when `name` is one of the three labels.
bool signal_kind_from_name(const std::string& name, EffortSignalKind& out);

/// Uniformly sampled effort values over one gait cycle.
struct GaitCycleSeries {
  int cycle_index = 0;
  std::vector<double> samples;

  bool operator==(const GaitCycleSeries&) const = default;
};

/// One subject: target Cobb angle plus the three signals, each a list of
/// cycles indexed 0..cycles-1.
struct ParticipantRecord {
  std::string id;
  double cobb_angle_deg = 0.0;
  std::array<std::vector<GaitCycleSeries>, kSignalKindCount> signals;

  const std::vector<GaitCycleSeries>& signal(EffortSignalKind kind) const {
    return signals[static_cast<std::size_t>(kind)];
  }
  std::vector<GaitCycleSeries>& signal(EffortSignalKind kind) {
    return signals[static_cast<std::size_t>(kind)];
  }

  bool operator==(const ParticipantRecord&) const = default;
};

struct Dataset {
  std::vector<ParticipantRecord> participants;
  int cycles_per_participant = 0;

  bool operator==(const Dataset&) const = default;
};

/// Seeded generator settings. Angle range defaults follow the study cohort
/// (15-66 degrees).
struct SyntheticConfig {
  int n_participants = 30;
  int cycles = 6;
  int samples_per_cycle = 100;
  double angle_min_deg = 15.0;
  double angle_max_deg = 66.0;
  double noise_std = 0.5;
  std::uint64_t seed = 42;
};

struct Violation {
  std::string code;
  std::string message;

  bool operator==(const Violation&) const = default;
};

inline constexpr const char* kTrialCsvHeader =
    "participant_id,cobb_angle_deg,signal,cycle,sample_index,value";

/// Parses the long-form trial CSV (one sample per row). Rows may appear in
/// any order; participants keep first-appearance order, samples are ordered
/// by sample_index. Throws cobb::Error on malformed input or any dataset
/// invariant violation, citing the offending row where one exists.
Dataset parse_trials_csv(const std::string& text);

/// Inverse of parse_trials_csv: LF line endings, '.' decimal separator,
/// shortest round-trip formatting, so parse(serialize(d)) == d.
std::string serialize_trials_csv(const Dataset& d);

/// Collects every invariant violation; empty means valid. Violations are
/// data, not failures.
std::vector<Violation> validate_dataset(const Dataset& d);

/// Deterministic synthetic dataset: participant i draws a latent angle
/// uniformly in [angle_min_deg, angle_max_deg] from its own derived stream,
/// then each signal is a smooth periodic waveform whose amplitude and offset
/// grow affinely with the angle, plus Gaussian noise of sd noise_std.
Dataset synthesize_dataset(const SyntheticConfig& cfg);

/// Throws cobb::Error when cfg violates its invariants.
void check_config(const SyntheticConfig& cfg);

/// Flat key/value text: one `key = value` per line, '#' comments, keys are
/// exactly the SyntheticConfig field names, unknown or repeated keys error.
SyntheticConfig parse_synthetic_config(const std::string& text);

std::string serialize_synthetic_config(const SyntheticConfig& cfg);

}  // namespace cobb

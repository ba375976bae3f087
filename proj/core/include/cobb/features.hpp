#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cobb/dataset.hpp"

namespace cobb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// How the two ambiguous stat rows are read. `deviation` keeps both
/// arguments meaningful: f1 = max(hi-m, m-lo), f3 = max(|hi|, |lo|).
/// `literal` takes the formulas at face value: f1 = hi-m, f3 = hi.
enum class StatsConvention { deviation, literal };

/// Six summary statistics of one concatenated signal. f2 mixes squared and
/// linear units (variance plus |mean|) and is kept literal.
struct SignalStats {
  double f1_peak_deviation = 0.0;
  double f2_var_plus_absmean = 0.0;
  double f3_peak_magnitude = 0.0;
  double f4_mean = 0.0;
  double f5_std = 0.0;
  double f6_range = 0.0;

  std::array<double, 6> as_array() const {
    return {f1_peak_deviation, f2_var_plus_absmean, f3_peak_magnitude,
            f4_mean, f5_std, f6_range};
  }
};

inline constexpr int kStatsPerSignal = 6;
inline constexpr int kFeatureCount = kSignalKindCount * kStatsPerSignal;

/// 18 features, signal-major then stat-minor:
/// [ml_force f1..f6, ap_torque f1..f6, ml_torque f1..f6].
using FeatureVector = std::array<double, kFeatureCount>;

/// Canonical column names, e.g. "ml_force_f1_peak_deviation".
const std::array<std::string, kFeatureCount>& feature_names();

/// One row per participant; `X` is n x width (width is 18 for matrices built
/// from a Dataset, but externally loaded matrices may differ).
struct FeatureMatrix {
  std::vector<std::string> ids;
  Matrix X;
  Vector y;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index width() const { return X.cols(); }
};

/// Per-column standardization parameters; population std, zero-variance
/// columns are pinned to scale 1 so they transform to zeros.
struct ScalerParams {
  Vector mean;
  Vector scale;
};

/// Population-moment statistics of one sample sequence. Throws on empty
/// input.
SignalStats signal_stats(std::span<const double> samples,
                         StatsConvention convention = StatsConvention::deviation);

/// Concatenates each signal's cycles in cycle order and applies
/// signal_stats, emitting signals in the fixed ml_force, ap_torque,
/// ml_torque order.
FeatureVector extract_features(const ParticipantRecord& p,
                               StatsConvention convention = StatsConvention::deviation);

/// One row per participant in dataset order; targets are the Cobb angles.
FeatureMatrix build_matrix(const Dataset& d,
                           StatsConvention convention = StatsConvention::deviation);

/// Column means and population stds. Columns with std < 1e-12 get scale 1.
ScalerParams fit_scaler(const Matrix& rows);

/// out(i,j) = (rows(i,j) - mean[j]) / scale[j]. Throws on width mismatch.
Matrix apply_scaler(const ScalerParams& p, const Matrix& rows);

/// Feature matrix CSV: header `participant_id,cobb_angle_deg,<18 names>`,
/// one row per participant, shortest round-trip number formatting.
std::string serialize_feature_csv(const FeatureMatrix& fm);

/// Parses a feature CSV. The header must start with participant_id; a
/// cobb_angle_deg column is required when `require_targets` (its values fill
/// y, otherwise y is zero-filled). Any further columns are features, so the
/// width follows the file.
FeatureMatrix parse_feature_csv(const std::string& text, bool require_targets);

/// FNV-1a 64 over ids (length-prefixed bytes), row-major feature values and
/// targets as IEEE-754 little-endian bytes. Pins report provenance.
std::uint64_t feature_matrix_digest(const FeatureMatrix& fm);

}  // namespace cobb

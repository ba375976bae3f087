#include "cobb/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

#include "cobb/error.hpp"
#include "cobb/report.hpp"
#include "cobb/rng.hpp"

namespace cobb {

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kStatsPerSignal> stat_names = {
      "f1_peak_deviation", "f2_var_plus_absmean", "f3_peak_magnitude",
      "f4_mean", "f5_std", "f6_range"};
  static const std::array<std::string, kFeatureCount> names = [] {
    std::array<std::string, kFeatureCount> out;
    int i = 0;
    for (EffortSignalKind kind : kSignalKinds) {
      for (const auto& stat : stat_names) {
        out[static_cast<std::size_t>(i++)] =
            std::string(signal_kind_name(kind)) + "_" + stat;
      }
    }
    return out;
  }();
  return names;
}

SignalStats signal_stats(std::span<const double> samples,
                         StatsConvention convention) {
  if (samples.empty()) {
    throw Error(errc::schema, "signal_stats: empty sample sequence");
  }
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  double hi = samples[0];
  double lo = samples[0];
  for (double v : samples) {
    sum += v;
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  const double m = sum / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - m) * (v - m);
  const double var = ss / n;

  SignalStats s;
  s.f1_peak_deviation = convention == StatsConvention::deviation
                            ? std::max(hi - m, m - lo)
                            : hi - m;
  s.f2_var_plus_absmean = std::max(var - m, var + m);
  s.f3_peak_magnitude = convention == StatsConvention::deviation
                            ? std::max(std::abs(hi), std::abs(lo))
                            : hi;
  s.f4_mean = m;
  s.f5_std = std::sqrt(var);
  s.f6_range = hi - lo;
  return s;
}

FeatureVector extract_features(const ParticipantRecord& p,
                               StatsConvention convention) {
  FeatureVector out;
  int i = 0;
  for (EffortSignalKind kind : kSignalKinds) {
    std::vector<double> concat;
    for (const auto& cycle : p.signal(kind)) {
      concat.insert(concat.end(), cycle.samples.begin(), cycle.samples.end());
    }
    if (concat.empty()) {
      throw Error(errc::schema, "participant '" + p.id + "' signal " +
                                    signal_kind_name(kind) + " is empty");
    }
    for (double v : signal_stats(concat, convention).as_array()) {
      out[static_cast<std::size_t>(i++)] = v;
    }
  }
  return out;
}

FeatureMatrix build_matrix(const Dataset& d, StatsConvention convention) {
  FeatureMatrix fm;
  const Eigen::Index n = static_cast<Eigen::Index>(d.participants.size());
  fm.X.resize(n, kFeatureCount);
  fm.y.resize(n);
  fm.ids.reserve(d.participants.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = d.participants[static_cast<std::size_t>(i)];
    const FeatureVector row = extract_features(p, convention);
    for (int j = 0; j < kFeatureCount; ++j) fm.X(i, j) = row[static_cast<std::size_t>(j)];
    fm.y(i) = p.cobb_angle_deg;
    fm.ids.push_back(p.id);
  }
  return fm;
}

ScalerParams fit_scaler(const Matrix& rows) {
  if (rows.rows() == 0) {
    throw Error(errc::schema, "fit_scaler: no rows");
  }
  ScalerParams p;
  const double n = static_cast<double>(rows.rows());
  p.mean = rows.colwise().mean();
  p.scale.resize(rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const double var = (rows.col(j).array() - p.mean(j)).square().sum() / n;
    const double sd = std::sqrt(var);
    p.scale(j) = sd < 1e-12 ? 1.0 : sd;
  }
  return p;
}

Matrix apply_scaler(const ScalerParams& p, const Matrix& rows) {
  if (rows.cols() != p.mean.size()) {
    throw Error(errc::width, "apply_scaler: row width " +
                                 std::to_string(rows.cols()) +
                                 " does not match fitted width " +
                                 std::to_string(p.mean.size()));
  }
  Matrix out = rows;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    out.col(j) = (out.col(j).array() - p.mean(j)) / p.scale(j);
  }
  return out;
}

std::string serialize_feature_csv(const FeatureMatrix& fm) {
  std::string out = "participant_id,cobb_angle_deg";
  const bool canonical = fm.width() == kFeatureCount;
  for (Eigen::Index j = 0; j < fm.width(); ++j) {
    out.push_back(',');
    out += canonical ? feature_names()[static_cast<std::size_t>(j)]
                     : "feature_" + std::to_string(j);
  }
  out.push_back('\n');
  for (Eigen::Index i = 0; i < fm.n(); ++i) {
    out += fm.ids[static_cast<std::size_t>(i)];
    out.push_back(',');
    out += format_double(fm.y(i));
    for (Eigen::Index j = 0; j < fm.width(); ++j) {
      out.push_back(',');
      out += format_double(fm.X(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

FeatureMatrix parse_feature_csv(const std::string& text, bool require_targets) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(errc::parse, "empty feature CSV");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        header.push_back(line.substr(start));
        break;
      }
      header.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
  }
  if (header.empty() || header[0] != "participant_id") {
    throw Error(errc::parse, "feature CSV header must start with participant_id");
  }
  const bool has_targets = header.size() >= 2 && header[1] == "cobb_angle_deg";
  if (require_targets && !has_targets) {
    throw Error(errc::parse, "feature CSV lacks a cobb_angle_deg column");
  }
  const std::size_t first_feature = has_targets ? 2 : 1;
  const std::size_t width = header.size() - first_feature;
  if (width == 0) {
    throw Error(errc::parse, "feature CSV has no feature columns");
  }

  std::vector<std::string> ids;
  std::vector<double> targets;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != header.size()) {
      throw Error(errc::parse, "row " + std::to_string(line_no) +
                                   ": expected " +
                                   std::to_string(header.size()) +
                                   " fields, got " +
                                   std::to_string(fields.size()));
    }
    ids.push_back(fields[0]);
    for (std::size_t f = (has_targets ? 1 : first_feature); f < fields.size(); ++f) {
      double v = 0.0;
      const char* b = fields[f].data();
      auto [ptr, ec] = std::from_chars(b, b + fields[f].size(), v);
      if (ec != std::errc() || ptr != b + fields[f].size() ||
          !std::isfinite(v)) {
        throw Error(errc::parse, "row " + std::to_string(line_no) +
                                     ": malformed value '" + fields[f] +
                                     "' in column " + header[f]);
      }
      if (has_targets && f == 1) {
        targets.push_back(v);
      } else {
        values.push_back(v);
      }
    }
  }
  if (ids.empty()) {
    throw Error(errc::parse, "feature CSV has no data rows");
  }

  FeatureMatrix fm;
  fm.ids = std::move(ids);
  const Eigen::Index n = static_cast<Eigen::Index>(fm.ids.size());
  fm.X.resize(n, static_cast<Eigen::Index>(width));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < fm.X.cols(); ++j) {
      fm.X(i, j) = values[static_cast<std::size_t>(i) * width +
                          static_cast<std::size_t>(j)];
    }
  }
  fm.y = Vector::Zero(n);
  if (has_targets) {
    for (Eigen::Index i = 0; i < n; ++i) fm.y(i) = targets[static_cast<std::size_t>(i)];
  }
  return fm;
}

std::uint64_t feature_matrix_digest(const FeatureMatrix& fm) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  auto feed = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001B3ull;
    }
  };
  auto feed_u64 = [&feed](std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    feed(b, 8);
  };
  auto feed_double = [&feed_u64](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    feed_u64(bits);
  };

  feed_u64(static_cast<std::uint64_t>(fm.n()));
  feed_u64(static_cast<std::uint64_t>(fm.width()));
  for (const auto& id : fm.ids) {
    feed_u64(id.size());
    feed(id.data(), id.size());
  }
  for (Eigen::Index i = 0; i < fm.n(); ++i) {
    for (Eigen::Index j = 0; j < fm.width(); ++j) feed_double(fm.X(i, j));
  }
  for (Eigen::Index i = 0; i < fm.n(); ++i) feed_double(fm.y(i));
  return h;
}

}  // namespace cobb

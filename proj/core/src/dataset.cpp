#include "cobb/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cobb/error.hpp"
#include "cobb/report.hpp"

namespace cobb {

const char* signal_kind_name(EffortSignalKind kind) {
  switch (kind) {
    case EffortSignalKind::ml_force: return "ml_force";
    case EffortSignalKind::ap_torque: return "ap_torque";
    case EffortSignalKind::ml_torque: return "ml_torque";
  }
  return "?";
}

bool signal_kind_from_name(const std::string& name, EffortSignalKind& out) {
  for (EffortSignalKind kind : kSignalKinds) {
    if (name == signal_kind_name(kind)) {
      out = kind;
      return true;
    }
  }
  return false;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
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
  return fields;
}

double parse_finite_double(const std::string& s, std::size_t line_no,
                           const char* what) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(errc::parse, "row " + std::to_string(line_no) +
                                 ": non-numeric " + what + " '" + s + "'");
  }
  if (!std::isfinite(v)) {
    throw Error(errc::parse, "row " + std::to_string(line_no) +
                                 ": non-finite " + what + " '" + s + "'");
  }
  return v;
}

int parse_nonneg_int(const std::string& s, std::size_t line_no,
                     const char* what) {
  int v = 0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || v < 0) {
    throw Error(errc::parse, "row " + std::to_string(line_no) +
                                 ": invalid " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

Dataset parse_trials_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(errc::parse, "empty input");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrialCsvHeader) {
    throw Error(errc::parse, std::string("header mismatch, expected '") +
                                 kTrialCsvHeader + "'");
  }

  struct Key {
    int participant;
    int signal;
    int cycle;
    int sample;
    auto operator<=>(const Key&) const = default;
  };

  std::vector<std::string> order;           // first-appearance participant ids
  std::map<std::string, int> participant_index;
  std::vector<double> angles;
  std::map<Key, double> values;

  std::size_t line_no = 1;
  std::size_t data_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 6) {
      throw Error(errc::parse, "row " + std::to_string(line_no) +
                                   ": expected 6 fields, got " +
                                   std::to_string(fields.size()));
    }
    const std::string& id = fields[0];
    if (id.empty()) {
      throw Error(errc::parse,
                  "row " + std::to_string(line_no) + ": empty participant_id");
    }
    const double angle =
        parse_finite_double(fields[1], line_no, "cobb_angle_deg");
    EffortSignalKind kind;
    if (!signal_kind_from_name(fields[2], kind)) {
      throw Error(errc::parse, "row " + std::to_string(line_no) +
                                   ": unknown signal label '" + fields[2] + "'");
    }
    const int cycle = parse_nonneg_int(fields[3], line_no, "cycle");
    const int sample = parse_nonneg_int(fields[4], line_no, "sample_index");
    const double value = parse_finite_double(fields[5], line_no, "value");

    auto [it, inserted] =
        participant_index.try_emplace(id, static_cast<int>(order.size()));
    if (inserted) {
      order.push_back(id);
      angles.push_back(angle);
    } else if (angles[static_cast<std::size_t>(it->second)] != angle) {
      throw Error(errc::parse,
                  "row " + std::to_string(line_no) +
                      ": inconsistent cobb_angle_deg for participant '" + id +
                      "'");
    }

    const Key key{it->second, static_cast<int>(kind), cycle, sample};
    if (!values.emplace(key, value).second) {
      throw Error(errc::parse,
                  "row " + std::to_string(line_no) + ": duplicate sample (" +
                      id + ", " + fields[2] + ", cycle " + fields[3] +
                      ", sample_index " + fields[4] + ")");
    }
    ++data_rows;
  }
  if (data_rows == 0) {
    throw Error(errc::parse, "no data rows");
  }

  Dataset d;
  d.participants.resize(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) {
    d.participants[p].id = order[p];
    d.participants[p].cobb_angle_deg = angles[p];
  }
  // values is ordered by (participant, signal, cycle, sample), so a single
  // pass appends cycles and samples in their final order.
  for (const auto& [key, value] : values) {
    auto& cycles =
        d.participants[static_cast<std::size_t>(key.participant)]
            .signals[static_cast<std::size_t>(key.signal)];
    if (cycles.empty() || cycles.back().cycle_index != key.cycle) {
      cycles.push_back(GaitCycleSeries{key.cycle, {}});
    }
    cycles.back().samples.push_back(value);
  }
  d.cycles_per_participant =
      d.participants.empty()
          ? 0
          : static_cast<int>(d.participants.front().signals[0].size());

  const auto violations = validate_dataset(d);
  if (!violations.empty()) {
    throw Error(errc::schema, violations.front().code + ": " +
                                  violations.front().message);
  }
  return d;
}

std::string serialize_trials_csv(const Dataset& d) {
  std::string out = kTrialCsvHeader;
  out.push_back('\n');
  for (const auto& p : d.participants) {
    const std::string angle = format_double(p.cobb_angle_deg);
    for (EffortSignalKind kind : kSignalKinds) {
      for (const auto& cycle : p.signal(kind)) {
        for (std::size_t s = 0; s < cycle.samples.size(); ++s) {
          out += p.id;
          out.push_back(',');
          out += angle;
          out.push_back(',');
          out += signal_kind_name(kind);
          out.push_back(',');
          out += std::to_string(cycle.cycle_index);
          out.push_back(',');
          out += std::to_string(s);
          out.push_back(',');
          out += format_double(cycle.samples[s]);
          out.push_back('\n');
        }
      }
    }
  }
  return out;
}

std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;
  std::set<std::string> seen;
  for (const auto& p : d.participants) {
    if (!seen.insert(p.id).second) {
      out.push_back({"duplicate-id",
                     "participant id '" + p.id + "' appears more than once"});
    }
    if (!std::isfinite(p.cobb_angle_deg) || p.cobb_angle_deg <= 0.0) {
      out.push_back({"invalid-angle", "participant '" + p.id +
                                          "' has non-positive or non-finite "
                                          "cobb_angle_deg"});
    }
    std::size_t samples_per_cycle = 0;
    bool samples_pinned = false;
    for (EffortSignalKind kind : kSignalKinds) {
      const auto& cycles = p.signal(kind);
      if (cycles.empty()) {
        out.push_back({"missing-signal", "participant '" + p.id +
                                             "' lacks signal " +
                                             signal_kind_name(kind)});
        continue;
      }
      if (static_cast<int>(cycles.size()) != d.cycles_per_participant) {
        out.push_back({"cycle-count", "participant '" + p.id + "' signal " +
                                          signal_kind_name(kind) + " has " +
                                          std::to_string(cycles.size()) +
                                          " cycles, expected " +
                                          std::to_string(
                                              d.cycles_per_participant)});
      }
      for (std::size_t c = 0; c < cycles.size(); ++c) {
        if (cycles[c].cycle_index != static_cast<int>(c)) {
          out.push_back({"cycle-gap", "participant '" + p.id + "' signal " +
                                          signal_kind_name(kind) +
                                          " has cycle_index " +
                                          std::to_string(cycles[c].cycle_index) +
                                          " at position " + std::to_string(c)});
        }
        if (cycles[c].samples.empty()) {
          out.push_back({"empty-cycle", "participant '" + p.id + "' signal " +
                                            signal_kind_name(kind) + " cycle " +
                                            std::to_string(cycles[c].cycle_index) +
                                            " has no samples"});
          continue;
        }
        if (!samples_pinned) {
          samples_per_cycle = cycles[c].samples.size();
          samples_pinned = true;
        } else if (cycles[c].samples.size() != samples_per_cycle) {
          out.push_back({"sample-count",
                         "participant '" + p.id + "' signal " +
                             signal_kind_name(kind) + " cycle " +
                             std::to_string(cycles[c].cycle_index) + " has " +
                             std::to_string(cycles[c].samples.size()) +
                             " samples, expected " +
                             std::to_string(samples_per_cycle)});
        }
        for (double v : cycles[c].samples) {
          if (!std::isfinite(v)) {
            out.push_back({"non-finite", "participant '" + p.id + "' signal " +
                                             signal_kind_name(kind) + " cycle " +
                                             std::to_string(cycles[c].cycle_index) +
                                             " contains a non-finite value"});
            break;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace cobb

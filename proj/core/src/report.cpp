#include "cobb/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "cobb/error.hpp"

namespace cobb {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

using Json = nlohmann::ordered_json;

std::string one_decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string digest_hex(std::uint64_t digest) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(digest));
  return buf;
}

Json header_to_json(const RunHeader& h) {
  Json j;
  j["artifact"] = kArtifactName;
  j["version"] = kArtifactVersion;
  j["dataset_digest"] = digest_hex(h.dataset_digest);
  j["n_samples"] = h.n_samples;
  j["n_features"] = h.n_features;
  j["k"] = h.k;
  j["seed"] = h.seed;
  j["scaler_mode"] = scaler_mode_name(h.scaler_mode);
  return j;
}

}  // namespace

std::string render_report(const RunHeader& header,
                          const std::vector<CVReport>& reports,
                          ReportFormat format) {
  if (format == ReportFormat::json) {
    Json j = header_to_json(header);
    Json results = Json::array();
    for (const CVReport& r : reports) {
      Json jr;
      jr["model"] = r.model_name;
      jr["seed"] = r.seed;
      jr["scaler_mode"] = scaler_mode_name(r.scaler_mode);
      jr["k"] = r.k;
      jr["per_fold_mae"] = r.per_fold_mae;
      jr["mean_mae"] = r.mean_mae;
      jr["std_mae"] = r.std_mae;
      jr["best"] = r.best;
      results.push_back(std::move(jr));
    }
    j["results"] = std::move(results);
    return j.dump(2) + "\n";
  }

  if (format == ReportFormat::csv) {
    std::string out =
        "model,mean_mae_deg,std_mae_deg,k,seed,scaler_mode,best,per_fold_mae\n";
    for (const CVReport& r : reports) {
      out += r.model_name;
      out += ',' + format_double(r.mean_mae);
      out += ',' + format_double(r.std_mae);
      out += ',' + std::to_string(r.k);
      out += ',' + std::to_string(r.seed);
      out += ',';
      out += scaler_mode_name(r.scaler_mode);
      out += ',';
      out += r.best ? "1" : "0";
      out += ',';
      for (std::size_t i = 0; i < r.per_fold_mae.size(); ++i) {
        if (i) out += ';';
        out += format_double(r.per_fold_mae[i]);
      }
      out += '\n';
    }
    return out;
  }

  // Markdown: the one-decimal summary table plus the run header.
  std::string out;
  out += "| # | Model | CV MAE (SD) degrees |\n";
  out += "|---|-------|---------------------|\n";
  int row = 1;
  for (const CVReport& r : reports) {
    out += "| " + std::to_string(row++) + " | " +
           (r.best ? "*" + r.model_name : r.model_name) + " | " +
           one_decimal(r.mean_mae) + " (" + one_decimal(r.std_mae) + ") |\n";
  }
  out += "\nk=" + std::to_string(header.k) + ", seed=" +
         std::to_string(header.seed) + ", scaler=" +
         scaler_mode_name(header.scaler_mode) + ", dataset_digest=" +
         digest_hex(header.dataset_digest) + ", version=" + kArtifactVersion +
         "\n";
  return out;
}

std::string render_summary_table(const std::vector<CVReport>& reports) {
  std::size_t name_width = 5;
  for (const CVReport& r : reports) {
    name_width = std::max(name_width, r.model_name.size() + 1);
  }
  std::ostringstream out;
  out << "model";
  out << std::string(name_width - 5, ' ') << "  mean_mae  std_mae\n";
  for (const CVReport& r : reports) {
    const std::string name = (r.best ? "*" : "") + r.model_name;
    out << name << std::string(name_width - name.size(), ' ') << "  "
        << one_decimal(r.mean_mae) << "       " << one_decimal(r.std_mae)
        << "\n";
  }
  return out.str();
}

std::string render_grid_result(const RunHeader& header, Algorithm algorithm,
                               const GridSearchResult& result) {
  Json j = header_to_json(header);
  j["algorithm"] = algorithm_name(algorithm);
  Json table = Json::array();
  for (const auto& entry : result.table) {
    Json je;
    Json assignment;
    for (const auto& [k, v] : entry.assignment) assignment[k] = v;
    je["params"] = std::move(assignment);
    if (entry.failed) {
      je["error"] = entry.error;
    } else {
      je["mean_mae"] = entry.mean_mae;
    }
    table.push_back(std::move(je));
  }
  j["table"] = std::move(table);
  Json best;
  for (const auto& entry : result.table) {
    if (!entry.failed && entry.mean_mae == result.best_mean_mae) {
      for (const auto& [k, v] : entry.assignment) best[k] = v;
      break;
    }
  }
  j["best_params"] = std::move(best);
  j["best_mean_mae"] = result.best_mean_mae;
  return j.dump(2) + "\n";
}

}  // namespace cobb

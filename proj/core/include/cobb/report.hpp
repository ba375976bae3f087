#pragma once

#include <string>
#include <vector>

#include "cobb/evaluation.hpp"

namespace cobb {

inline constexpr const char* kArtifactName = "cobb-bench";
inline constexpr const char* kArtifactVersion = "1.0.0";

enum class ReportFormat { json, csv, md };

struct RunHeader {
  std::uint64_t dataset_digest = 0;
  int n_samples = 0;
  int n_features = 0;
  int k = 0;
  std::uint64_t seed = 0;
  ScalerMode scaler_mode = ScalerMode::per_fold;
};

/// Full-precision report serialization. JSON keeps every digit; csv/md round
/// the displayed MAE to one decimal (the summary-table style) while the JSON
/// stays exact.
std::string render_report(const RunHeader& header,
                          const std::vector<CVReport>& reports,
                          ReportFormat format);

/// Console summary: model, mean MAE, std to one decimal, best model starred.
std::string render_summary_table(const std::vector<CVReport>& reports);

std::string render_grid_result(const RunHeader& header, Algorithm algorithm,
                               const GridSearchResult& result);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace cobb

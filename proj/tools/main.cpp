// cobb-bench: gait-effort Cobb angle regression benchmark CLI.
//
// Subcommands mirror the pipeline stages: synth -> features -> cv /
// benchmark / gridsearch, plus train/predict for persisted models. Every
// command is deterministic given its arguments and seeds; diagnostics go to
// stderr, data to files or stdout.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cobb/dataset.hpp"
#include "cobb/error.hpp"
#include "cobb/evaluation.hpp"
#include "cobb/features.hpp"
#include "cobb/persistence.hpp"
#include "cobb/report.hpp"

namespace {

using cobb::Error;
using Json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(cobb::errc::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(cobb::errc::io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(cobb::errc::io, "write failed for '" + path + "'");
}

int worker_threads() {
  const char* env = std::getenv("COBB_BENCH_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  try {
    return std::max(0, std::stoi(env));
  } catch (const std::exception&) {
    throw Error(cobb::errc::config,
                "COBB_BENCH_THREADS must be a non-negative integer");
  }
}

struct DataOptions {
  std::string input;
  std::string synthetic_config;
  std::optional<std::uint64_t> seed_override;
};

cobb::SyntheticConfig load_synthetic(const DataOptions& opts) {
  cobb::SyntheticConfig cfg;
  if (!opts.synthetic_config.empty()) {
    cfg = cobb::parse_synthetic_config(read_file(opts.synthetic_config));
  }
  if (opts.seed_override) cfg.seed = *opts.seed_override;
  cobb::check_config(cfg);
  return cfg;
}

/// Loads a feature matrix from --input (trial CSV or feature CSV, detected
/// by header) or from a synthetic config; with neither flag the default
/// synthetic dataset (n=30, seed 42) is generated in memory.
cobb::FeatureMatrix load_matrix(const DataOptions& opts, bool require_targets) {
  if (!opts.input.empty() && !opts.synthetic_config.empty()) {
    throw Error(cobb::errc::args,
                "use either --input or --synthetic-config, not both");
  }
  if (!opts.input.empty()) {
    const std::string text = read_file(opts.input);
    const std::size_t eol = text.find('\n');
    std::string first = text.substr(0, eol == std::string::npos ? text.size() : eol);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first == cobb::kTrialCsvHeader) {
      return cobb::build_matrix(cobb::parse_trials_csv(text));
    }
    return cobb::parse_feature_csv(text, require_targets);
  }
  return cobb::build_matrix(cobb::synthesize_dataset(load_synthetic(opts)));
}

cobb::ScalerMode parse_scaler_mode(const std::string& s) {
  if (s == "per-fold" || s == "per_fold") return cobb::ScalerMode::per_fold;
  if (s == "global") return cobb::ScalerMode::global;
  throw Error(cobb::errc::args, "unknown scaler mode '" + s + "'");
}

cobb::ReportFormat parse_format(const std::string& s) {
  if (s == "json") return cobb::ReportFormat::json;
  if (s == "csv") return cobb::ReportFormat::csv;
  if (s == "md") return cobb::ReportFormat::md;
  throw Error(cobb::errc::args, "unknown format '" + s + "'");
}

std::vector<cobb::RegressorSpec> parse_model_list(const std::string& models) {
  std::vector<cobb::RegressorSpec> specs;
  if (models == "all") {
    for (cobb::Algorithm a : cobb::algorithm_roster()) {
      specs.push_back(cobb::default_spec(a));
    }
    return specs;
  }
  // Selection is re-ordered to the canonical roster order for reporting.
  std::vector<std::string> names;
  std::stringstream ss(models);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) names.push_back(item);
  }
  if (names.empty()) {
    throw Error(cobb::errc::args, "no models requested");
  }
  for (const std::string& n : names) {
    if (!cobb::algorithm_from_name(n)) {
      throw Error(cobb::errc::args, "unknown model '" + n + "'");
    }
  }
  for (cobb::Algorithm a : cobb::algorithm_roster()) {
    const std::string name = cobb::algorithm_name(a);
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      specs.push_back(cobb::default_spec(a));
    }
  }
  return specs;
}

cobb::RunHeader make_header(const cobb::FeatureMatrix& fm, int k,
                            std::uint64_t seed, cobb::ScalerMode mode) {
  cobb::RunHeader h;
  h.dataset_digest = cobb::feature_matrix_digest(fm);
  h.n_samples = static_cast<int>(fm.n());
  h.n_features = static_cast<int>(fm.width());
  h.k = k;
  h.seed = seed;
  h.scaler_mode = mode;
  return h;
}

struct GridFile {
  cobb::Algorithm algorithm;
  std::vector<cobb::GridAxis> axes;
};

GridFile parse_grid_file(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(cobb::errc::parse, std::string("grid file: ") + e.what());
  }
  GridFile g;
  const std::string name = j.at("algorithm").get<std::string>();
  const auto alg = cobb::algorithm_from_name(name);
  if (!alg) throw Error(cobb::errc::parse, "grid file: unknown algorithm '" + name + "'");
  g.algorithm = *alg;
  if (!j.contains("grid") || !j.at("grid").is_object()) {
    throw Error(cobb::errc::parse, "grid file: missing 'grid' object");
  }
  for (const auto& [key, values] : j.at("grid").items()) {
    cobb::GridAxis axis;
    axis.name = key;
    if (!values.is_array() || values.empty()) {
      throw Error(cobb::errc::parse,
                  "grid file: axis '" + key + "' must be a non-empty array");
    }
    for (const auto& v : values) {
      if (v.is_string()) {
        axis.values.push_back(v.get<std::string>());
      } else if (v.is_number()) {
        axis.values.push_back(cobb::format_double(v.get<double>()));
      } else {
        throw Error(cobb::errc::parse,
                    "grid file: axis '" + key + "' holds a non-scalar value");
      }
    }
    g.axes.push_back(std::move(axis));
  }
  if (g.axes.empty()) {
    throw Error(cobb::errc::parse, "grid file: empty grid");
  }
  return g;
}

void apply_overrides(cobb::RegressorSpec& spec,
                     const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const std::size_t eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(cobb::errc::args, "--set expects key=value, got '" + o + "'");
    }
    cobb::set_hyperparameter(spec, o.substr(0, eq), o.substr(eq + 1));
  }
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_file(out_path, content);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cobb angle regression benchmark on gait joint-effort signals"};
  app.require_subcommand(1);

  DataOptions data;
  int k = 10;
  std::uint64_t seed = 42;
  bool seed_given = false;
  std::string scaler = "per-fold";
  std::string models = "all";
  std::string out_path;
  std::string format = "json";
  std::string grid_path;
  std::string model_path;
  std::vector<std::string> overrides;

  auto add_data_flags = [&](CLI::App* cmd, bool with_cv_flags) {
    cmd->add_option("--input", data.input, "trial CSV or feature CSV");
    cmd->add_option("--synthetic-config", data.synthetic_config,
                    "synthetic generator config file");
    cmd->add_option("--seed", seed, "run seed")->each([&](const std::string&) {
      seed_given = true;
    });
    if (with_cv_flags) {
      cmd->add_option("--k", k, "number of folds");
      cmd->add_option("--scaler", scaler, "per-fold or global");
    }
    cmd->add_option("--out", out_path, "output path (default stdout)");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic trial CSV");
  add_data_flags(synth, false);

  CLI::App* features = app.add_subcommand("features", "extract the feature matrix");
  add_data_flags(features, false);

  CLI::App* cv = app.add_subcommand("cv", "cross-validate a single model");
  add_data_flags(cv, true);
  cv->add_option("--models", models, "single model name");
  cv->add_option("--format", format, "json, csv or md");
  cv->add_option("--set", overrides, "hyperparameter override key=value");

  CLI::App* bench = app.add_subcommand("benchmark", "cross-validate a model roster");
  add_data_flags(bench, true);
  bench->add_option("--models", models, "comma list or 'all'");
  bench->add_option("--format", format, "json, csv or md");

  CLI::App* gridsearch = app.add_subcommand("gridsearch", "grid search one algorithm");
  add_data_flags(gridsearch, true);
  gridsearch->add_option("--grid", grid_path, "grid JSON file")->required();

  CLI::App* train = app.add_subcommand("train", "fit and persist one model");
  add_data_flags(train, false);
  train->add_option("--models", models, "single model name");
  train->add_option("--set", overrides, "hyperparameter override key=value");

  CLI::App* predict_cmd = app.add_subcommand("predict", "predict with a persisted model");
  predict_cmd->add_option("--input", data.input, "trial CSV or feature CSV")->required();
  predict_cmd->add_option("--model", model_path, "persisted model file")->required();
  predict_cmd->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);

    data.seed_override = seed_given ? std::optional<std::uint64_t>(seed)
                                    : std::nullopt;
    const int threads = worker_threads();

    if (*synth) {
      const cobb::SyntheticConfig cfg = load_synthetic(data);
      if (!data.input.empty()) {
        throw Error(cobb::errc::args, "synth takes no --input");
      }
      emit(out_path, cobb::serialize_trials_csv(cobb::synthesize_dataset(cfg)));
    } else if (*features) {
      const cobb::FeatureMatrix fm = load_matrix(data, true);
      emit(out_path, cobb::serialize_feature_csv(fm));
    } else if (*cv) {
      auto specs = parse_model_list(models);
      if (specs.size() != 1) {
        throw Error(cobb::errc::args, "cv expects exactly one model");
      }
      apply_overrides(specs.front(), overrides);
      const cobb::ScalerMode mode = parse_scaler_mode(scaler);
      const cobb::FeatureMatrix fm = load_matrix(data, true);
      auto report = cobb::cross_validate(fm, specs.front(), k, seed, mode, threads);
      report.best = true;
      emit(out_path,
           cobb::render_report(make_header(fm, k, seed, mode), {report},
                               parse_format(format)));
    } else if (*bench) {
      const auto specs = parse_model_list(models);
      const cobb::ScalerMode mode = parse_scaler_mode(scaler);
      const cobb::FeatureMatrix fm = load_matrix(data, true);
      const auto reports =
          cobb::benchmark_models(fm, specs, k, seed, mode, threads);
      emit(out_path,
           cobb::render_report(make_header(fm, k, seed, mode), reports,
                               parse_format(format)));
      if (!out_path.empty()) {
        std::cout << cobb::render_summary_table(reports);
      }
    } else if (*gridsearch) {
      const GridFile grid = parse_grid_file(read_file(grid_path));
      const cobb::ScalerMode mode = parse_scaler_mode(scaler);
      const cobb::FeatureMatrix fm = load_matrix(data, true);
      const auto result = cobb::grid_search(fm, grid.algorithm, grid.axes, k,
                                            seed, mode, threads);
      emit(out_path, cobb::render_grid_result(make_header(fm, k, seed, mode),
                                              grid.algorithm, result));
    } else if (*train) {
      auto specs = parse_model_list(models);
      if (specs.size() != 1) {
        throw Error(cobb::errc::args, "train expects exactly one model");
      }
      apply_overrides(specs.front(), overrides);
      const cobb::FeatureMatrix fm = load_matrix(data, true);
      cobb::ModelArtifact artifact;
      artifact.scaler = cobb::fit_scaler(fm.X);
      const cobb::Matrix scaled = cobb::apply_scaler(*artifact.scaler, fm.X);
      artifact.model = cobb::fit_model(scaled, fm.y, specs.front(), seed);
      emit(out_path, cobb::save_model(artifact));
    } else if (*predict_cmd) {
      const cobb::ModelArtifact artifact = cobb::load_model(read_file(model_path));
      const cobb::FeatureMatrix fm = load_matrix(data, false);
      cobb::Matrix x = fm.X;
      if (artifact.scaler) {
        if (x.cols() != artifact.scaler->mean.size()) {
          throw Error(cobb::errc::width,
                      "input width " + std::to_string(x.cols()) +
                          " does not match model width " +
                          std::to_string(artifact.scaler->mean.size()));
        }
        x = cobb::apply_scaler(*artifact.scaler, x);
      }
      const cobb::Vector pred = cobb::predict(artifact.model, x);
      std::string out = "participant_id,predicted_cobb_deg\n";
      for (Eigen::Index i = 0; i < pred.size(); ++i) {
        out += fm.ids[static_cast<std::size_t>(i)] + ',' +
               cobb::format_double(pred(i)) + '\n';
      }
      emit(out_path, out);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "E_" << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

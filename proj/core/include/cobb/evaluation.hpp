#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cobb/features.hpp"
#include "cobb/regressors.hpp"

namespace cobb {

enum class ScalerMode { per_fold, global };

const char* scaler_mode_name(ScalerMode m);

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of;  // sample index -> fold id
  std::uint64_t seed = 0;

  std::vector<int> test_indices(int fold) const;
  std::vector<int> train_indices(int fold) const;
};

struct CVReport {
  std::string model_name;
  std::vector<double> per_fold_mae;
  double mean_mae = 0.0;
  double std_mae = 0.0;  // population std over folds
  std::uint64_t seed = 0;
  ScalerMode scaler_mode = ScalerMode::per_fold;
  int k = 0;
  bool best = false;
};

struct GridSearchResult {
  RegressorSpec best_spec;
  double best_mean_mae = 0.0;
  struct Entry {
    RegressorSpec spec;
    std::vector<std::pair<std::string, std::string>> assignment;
    double mean_mae = 0.0;
    bool failed = false;
    std::string error;
  };
  std::vector<Entry> table;  // enumeration order
};

/// Mean absolute error in degrees. Throws on length mismatch or n = 0.
double mae(const Vector& predictions, const Vector& truths);

/// Fisher-Yates shuffle of 0..n-1 seeded by `seed`, dealt into k contiguous
/// blocks, larger blocks first. Throws unless 2 <= k <= n.
FoldAssignment make_folds(int n, int k, std::uint64_t seed);

/// K-fold CV of one spec. per_fold fits the scaler on training rows only;
/// global fits it once on all rows before splitting. Fold model seeds are
/// fold_seed(seed, model_name, fold). threads <= 0 runs sequentially;
/// parallel runs are bit-identical to sequential ones.
CVReport cross_validate(const FeatureMatrix& fm, const RegressorSpec& spec,
                        int k, std::uint64_t seed, ScalerMode scaler_mode,
                        int threads = 0);

/// One grid axis: hyperparameter name and its candidate values (decimal or
/// name strings, applied via set_hyperparameter).
struct GridAxis {
  std::string name;
  std::vector<std::string> values;
};

/// Cartesian product in declared axis order, evaluated by cross_validate;
/// best = first minimizer. CV errors are recorded per combination without
/// aborting the rest.
GridSearchResult grid_search(const FeatureMatrix& fm, Algorithm algorithm,
                             const std::vector<GridAxis>& grid, int k,
                             std::uint64_t seed, ScalerMode scaler_mode,
                             int threads = 0);

/// One CVReport per spec under identical folds (same seed), ordered as the
/// roster; flags the best mean MAE.
std::vector<CVReport> benchmark_models(const FeatureMatrix& fm,
                                       const std::vector<RegressorSpec>& specs,
                                       int k, std::uint64_t seed,
                                       ScalerMode scaler_mode, int threads = 0);

namespace detail {

/// Counts, per sample row, how often the scaler fit read that row; the
/// leakage test asserts test-fold rows stay at zero.
struct ScalerAccessCounter {
  std::vector<std::vector<int>> reads_per_fold;  // [fold][row]
};

CVReport cross_validate_instrumented(const FeatureMatrix& fm,
                                     const RegressorSpec& spec, int k,
                                     std::uint64_t seed, ScalerMode scaler_mode,
                                     int threads, ScalerAccessCounter* counter);

}  // namespace detail

}  // namespace cobb

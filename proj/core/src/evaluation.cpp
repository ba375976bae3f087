#include "cobb/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>

#include "cobb/error.hpp"
#include "cobb/rng.hpp"

namespace cobb {

const char* scaler_mode_name(ScalerMode m) {
  return m == ScalerMode::per_fold ? "per_fold" : "global";
}

std::vector<int> FoldAssignment::test_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> FoldAssignment::train_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(static_cast<int>(i));
  }
  return out;
}

double mae(const Vector& predictions, const Vector& truths) {
  if (predictions.size() != truths.size()) {
    throw Error(errc::width, "mae: length mismatch");
  }
  if (predictions.size() == 0) {
    throw Error(errc::schema, "mae: empty input");
  }
  return (predictions - truths).cwiseAbs().sum() /
         static_cast<double>(predictions.size());
}

FoldAssignment make_folds(int n, int k, std::uint64_t seed) {
  if (k < 2) throw Error(errc::config, "make_folds: k must be >= 2");
  if (k > n) throw Error(errc::config, "make_folds: k exceeds sample count");

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);

  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  fa.fold_of.assign(static_cast<std::size_t>(n), 0);
  // Contiguous blocks over the shuffled order, larger blocks first.
  const int base = n / k;
  const int larger = n % k;
  std::size_t pos = 0;
  for (int fold = 0; fold < k; ++fold) {
    const int size = base + (fold < larger ? 1 : 0);
    for (int j = 0; j < size; ++j) {
      fa.fold_of[static_cast<std::size_t>(perm[pos++])] = fold;
    }
  }
  return fa;
}

namespace {

/// Runs tasks 0..count-1, each writing only its own slot. threads <= 0 is
/// sequential. Failures surface deterministically: the lowest-index task's
/// error wins regardless of schedule.
void run_tasks(int count, int threads,
               const std::function<void(int)>& task) {
  if (threads <= 0 || count <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) break;
        try {
          task(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Matrix select_rows(const Matrix& X, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  }
  return out;
}

Vector select(const Vector& y, std::span<const int> rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = y(rows[i]);
  }
  return out;
}

/// Scaler fit restricted to the given rows; all training-row reads go
/// through here so the counter sees exactly what the fit consumed.
ScalerParams fit_scaler_on_rows(const FeatureMatrix& fm,
                                std::span<const int> rows,
                                std::vector<int>* read_counter) {
  Matrix sub(static_cast<Eigen::Index>(rows.size()), fm.X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sub.row(static_cast<Eigen::Index>(i)) = fm.X.row(rows[i]);
    if (read_counter) ++(*read_counter)[static_cast<std::size_t>(rows[i])];
  }
  return fit_scaler(sub);
}

CVReport cross_validate_impl(const FeatureMatrix& fm, const RegressorSpec& spec,
                             int k, std::uint64_t seed, ScalerMode scaler_mode,
                             int threads,
                             detail::ScalerAccessCounter* counter) {
  const int n = static_cast<int>(fm.n());
  if (n < k) {
    throw Error(errc::config, "cross_validate: fewer samples than folds");
  }
  const FoldAssignment folds = make_folds(n, k, seed);
  const std::string model_name = algorithm_name(spec.algorithm);

  ScalerParams global_scaler;
  if (scaler_mode == ScalerMode::global) {
    global_scaler = fit_scaler(fm.X);
  }
  if (counter) {
    counter->reads_per_fold.assign(
        static_cast<std::size_t>(k),
        std::vector<int>(static_cast<std::size_t>(n), 0));
  }

  std::vector<double> per_fold(static_cast<std::size_t>(k), 0.0);

  run_tasks(k, threads, [&](int fold) {
    try {
      const auto train_idx = folds.train_indices(fold);
      const auto test_idx = folds.test_indices(fold);

      ScalerParams scaler;
      if (scaler_mode == ScalerMode::per_fold) {
        scaler = fit_scaler_on_rows(
            fm, train_idx,
            counter ? &counter->reads_per_fold[static_cast<std::size_t>(fold)]
                    : nullptr);
      } else {
        scaler = global_scaler;
      }

      const Matrix x_train = apply_scaler(scaler, select_rows(fm.X, train_idx));
      const Matrix x_test = apply_scaler(scaler, select_rows(fm.X, test_idx));
      const Vector y_train = select(fm.y, train_idx);
      const Vector y_test = select(fm.y, test_idx);

      const TrainedModel model =
          fit_model(x_train, y_train, spec,
                    fold_seed(seed, model_name, static_cast<std::uint64_t>(fold)));
      per_fold[static_cast<std::size_t>(fold)] =
          mae(predict(model, x_test), y_test);
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(fold) + ": " + e.what());
    }
  });

  CVReport report;
  report.model_name = model_name;
  report.per_fold_mae = per_fold;
  report.k = k;
  report.seed = seed;
  report.scaler_mode = scaler_mode;
  double sum = 0.0;
  for (double v : per_fold) sum += v;
  report.mean_mae = sum / static_cast<double>(k);
  double ss = 0.0;
  for (double v : per_fold) ss += (v - report.mean_mae) * (v - report.mean_mae);
  report.std_mae = std::sqrt(ss / static_cast<double>(k));
  return report;
}

}  // namespace

CVReport cross_validate(const FeatureMatrix& fm, const RegressorSpec& spec,
                        int k, std::uint64_t seed, ScalerMode scaler_mode,
                        int threads) {
  return cross_validate_impl(fm, spec, k, seed, scaler_mode, threads, nullptr);
}

namespace detail {

CVReport cross_validate_instrumented(const FeatureMatrix& fm,
                                     const RegressorSpec& spec, int k,
                                     std::uint64_t seed, ScalerMode scaler_mode,
                                     int threads, ScalerAccessCounter* counter) {
  return cross_validate_impl(fm, spec, k, seed, scaler_mode, threads, counter);
}

}  // namespace detail

GridSearchResult grid_search(const FeatureMatrix& fm, Algorithm algorithm,
                             const std::vector<GridAxis>& grid, int k,
                             std::uint64_t seed, ScalerMode scaler_mode,
                             int threads) {
  if (grid.empty()) {
    throw Error(errc::config, "grid_search: empty grid");
  }
  for (const auto& axis : grid) {
    if (axis.values.empty()) {
      throw Error(errc::config,
                  "grid_search: axis '" + axis.name + "' has no values");
    }
  }

  // Cartesian product in declared axis order; the last axis varies fastest.
  std::size_t combos = 1;
  for (const auto& axis : grid) combos *= axis.values.size();

  GridSearchResult result;
  result.table.resize(combos);
  for (std::size_t c = 0; c < combos; ++c) {
    GridSearchResult::Entry& entry = result.table[c];
    entry.spec = default_spec(algorithm);
    std::size_t rem = c;
    std::size_t stride = combos;
    for (const auto& axis : grid) {
      stride /= axis.values.size();
      const std::size_t pick = rem / stride;
      rem %= stride;
      entry.assignment.emplace_back(axis.name, axis.values[pick]);
      set_hyperparameter(entry.spec, axis.name, axis.values[pick]);
    }
    try {
      entry.mean_mae =
          cross_validate(fm, entry.spec, k, seed, scaler_mode, threads)
              .mean_mae;
    } catch (const Error& e) {
      entry.failed = true;
      entry.error = std::string(e.code()) + ": " + e.what();
      entry.mean_mae = std::numeric_limits<double>::infinity();
    }
  }

  std::size_t best = combos;
  for (std::size_t c = 0; c < combos; ++c) {
    if (result.table[c].failed) continue;
    if (best == combos || result.table[c].mean_mae < result.table[best].mean_mae) {
      best = c;
    }
  }
  if (best == combos) {
    throw Error(errc::fit, "grid_search: every combination failed");
  }
  result.best_spec = result.table[best].spec;
  result.best_mean_mae = result.table[best].mean_mae;
  return result;
}

std::vector<CVReport> benchmark_models(const FeatureMatrix& fm,
                                       const std::vector<RegressorSpec>& specs,
                                       int k, std::uint64_t seed,
                                       ScalerMode scaler_mode, int threads) {
  if (specs.empty()) {
    throw Error(errc::config, "benchmark: no models requested");
  }
  std::vector<CVReport> reports(specs.size());
  // One task per model; each model's folds run sequentially inside it.
  run_tasks(static_cast<int>(specs.size()), threads, [&](int i) {
    reports[static_cast<std::size_t>(i)] =
        cross_validate(fm, specs[static_cast<std::size_t>(i)], k, seed,
                       scaler_mode, 0);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].mean_mae < reports[best].mean_mae) best = i;
  }
  reports[best].best = true;
  return reports;
}

}  // namespace cobb

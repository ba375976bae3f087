#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cobb/error.hpp"
#include "cobb/evaluation.hpp"
#include "cobb/report.hpp"
#include "cobb/rng.hpp"
#include "oracles.hpp"

using namespace cobb;

namespace {

/// Feature matrix with one informative column and a constant column, so the
/// degenerate-scale guard gets exercised in every CV run.
FeatureMatrix tiny_matrix(int n, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix fm;
  fm.X.resize(n, 3);
  fm.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double angle = rng.next_uniform(15.0, 66.0);
    fm.X(i, 0) = 2.0 * angle + rng.next_uniform(-1.0, 1.0);
    fm.X(i, 1) = rng.next_uniform(-5.0, 5.0);
    fm.X(i, 2) = 7.0;  // constant
    fm.y(i) = angle;
    fm.ids.push_back("P" + std::to_string(i + 1));
  }
  return fm;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("mae hand cases") {
  Vector a(2), b(2);
  a << 30, 40;
  b << 32, 44;
  CHECK(mae(a, b) == 3.0);
  CHECK(mae(a, a) == 0.0);

  Vector empty(0);
  CHECK_THROWS_AS(mae(empty, empty), Error);
  Vector c(3);
  CHECK_THROWS_AS(mae(a, c), Error);
}

TEST_CASE("mae is symmetric") {
  Rng rng(80);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(12));
    const Vector a = oracles::random_vector(rng, n, -50.0, 50.0);
    const Vector b = oracles::random_vector(rng, n, -50.0, 50.0);
    REQUIRE(mae(a, b) == mae(b, a));
  }
}

TEST_CASE("thirty samples in ten folds of three") {
  const FoldAssignment fa = make_folds(30, 10, 42);
  for (int f = 0; f < 10; ++f) {
    CHECK(fa.test_indices(f).size() == 3);
  }
}

TEST_CASE("k equal to n gives singleton folds") {
  const FoldAssignment fa = make_folds(5, 5, 1);
  std::set<int> seen;
  for (int f = 0; f < 5; ++f) {
    const auto test = fa.test_indices(f);
    REQUIRE(test.size() == 1);
    seen.insert(test.front());
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("fold assignment is seeded and varies across seeds") {
  const FoldAssignment a = make_folds(12, 4, 7);
  const FoldAssignment b = make_folds(12, 4, 7);
  CHECK(a.fold_of == b.fold_of);

  int differing_seeds = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    if (make_folds(12, 4, seed).fold_of != a.fold_of) ++differing_seeds;
  }
  CHECK(differing_seeds > 90);
}

TEST_CASE("fold partitions are exact for all small (n, k)") {
  for (int n = 2; n <= 40; ++n) {
    for (int k = 2; k <= n; ++k) {
      const FoldAssignment fa = make_folds(n, k, 5);
      REQUIRE(static_cast<int>(fa.fold_of.size()) == n);
      std::vector<int> count(static_cast<std::size_t>(k), 0);
      for (int f : fa.fold_of) {
        REQUIRE(f >= 0);
        REQUIRE(f < k);
        ++count[static_cast<std::size_t>(f)];
      }
      const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
      REQUIRE(*lo >= 1);
      REQUIRE(*hi - *lo <= 1);
    }
  }
}

TEST_CASE("fold bounds are enforced") {
  CHECK_THROWS_AS(make_folds(5, 6, 0), Error);
  CHECK_THROWS_AS(make_folds(5, 1, 0), Error);
}

TEST_CASE("every sample is tested exactly once per run") {
  const FoldAssignment fa = make_folds(23, 7, 3);
  std::vector<int> tested(23, 0);
  for (int f = 0; f < 7; ++f) {
    for (int i : fa.test_indices(f)) ++tested[static_cast<std::size_t>(i)];
  }
  CHECK(std::all_of(tested.begin(), tested.end(), [](int c) { return c == 1; }));
}

TEST_CASE("baseline on constant targets scores zero everywhere") {
  FeatureMatrix fm = tiny_matrix(12, 4);
  fm.y.setConstant(30.0);
  const CVReport r = cross_validate(fm, default_spec(Algorithm::mean_baseline),
                                    4, 42, ScalerMode::per_fold);
  CHECK(r.mean_mae == 0.0);
  for (double v : r.per_fold_mae) CHECK(v == 0.0);
}

TEST_CASE("leave-one-out 1-nn on the integer line") {
  FeatureMatrix fm;
  fm.X.resize(10, 1);
  fm.y.resize(10);
  for (int i = 0; i < 10; ++i) {
    fm.X(i, 0) = i;
    fm.y(i) = i;
    fm.ids.push_back("P" + std::to_string(i));
  }
  RegressorSpec spec = default_spec(Algorithm::knn);
  spec.knn.k = 1;
  const CVReport r = cross_validate(fm, spec, 10, 42, ScalerMode::per_fold);
  for (double v : r.per_fold_mae) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.mean_mae == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("per-fold maes match an independently scripted loop") {
  const FeatureMatrix fm = tiny_matrix(6, 9);
  RegressorSpec spec = default_spec(Algorithm::decision_tree);
  const int k = 3;
  const std::uint64_t seed = 42;
  const CVReport r = cross_validate(fm, spec, k, seed, ScalerMode::per_fold);

  const FoldAssignment fa = make_folds(6, k, seed);
  for (int fold = 0; fold < k; ++fold) {
    // Scripted loop: split, standardize with hand-rolled moments, fit, score.
    std::vector<int> train, test;
    for (int i = 0; i < 6; ++i) {
      (fa.fold_of[static_cast<std::size_t>(i)] == fold ? test : train).push_back(i);
    }
    const auto nt = static_cast<double>(train.size());
    Vector mean = Vector::Zero(3), sd = Vector::Zero(3);
    for (int i : train) mean += fm.X.row(i).transpose();
    mean /= nt;
    for (int i : train) {
      sd += (fm.X.row(i).transpose() - mean).cwiseAbs2();
    }
    sd = (sd / nt).cwiseSqrt();
    for (int j = 0; j < 3; ++j) {
      if (sd(j) < 1e-12) sd(j) = 1.0;
    }
    auto standardize = [&](const std::vector<int>& rows) {
      Matrix out(static_cast<Eigen::Index>(rows.size()), 3);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) =
            ((fm.X.row(rows[i]).transpose() - mean).array() / sd.array())
                .transpose();
      }
      return out;
    };
    Vector y_train(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) y_train(static_cast<Eigen::Index>(i)) = fm.y(train[i]);
    Vector y_test(static_cast<Eigen::Index>(test.size()));
    for (std::size_t i = 0; i < test.size(); ++i) y_test(static_cast<Eigen::Index>(i)) = fm.y(test[i]);

    const TrainedModel model =
        fit_model(standardize(train), y_train, spec,
                  fold_seed(seed, "decision_tree", static_cast<std::uint64_t>(fold)));
    const Vector pred = predict(model, standardize(test));
    double hand_mae = 0.0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      hand_mae += std::abs(pred(i) - y_test(i));
    }
    hand_mae /= static_cast<double>(pred.size());
    CHECK(std::abs(hand_mae - r.per_fold_mae[static_cast<std::size_t>(fold)]) < 1e-12);
  }
}

TEST_CASE("mean and std are recomputable from the fold scores") {
  const FeatureMatrix fm = tiny_matrix(15, 11);
  const CVReport r = cross_validate(fm, default_spec(Algorithm::ridge), 5, 13,
                                    ScalerMode::per_fold);
  double mean = 0.0;
  for (double v : r.per_fold_mae) mean += v;
  mean /= static_cast<double>(r.per_fold_mae.size());
  double ss = 0.0;
  for (double v : r.per_fold_mae) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(r.per_fold_mae.size()));
  CHECK(std::abs(mean - r.mean_mae) < 1e-12);
  CHECK(std::abs(sd - r.std_mae) < 1e-12);
  for (double v : r.per_fold_mae) CHECK(v >= 0.0);
}

TEST_CASE("per-fold scaler never reads test rows") {
  const FeatureMatrix fm = tiny_matrix(12, 21);
  detail::ScalerAccessCounter counter;
  const CVReport r = detail::cross_validate_instrumented(
      fm, default_spec(Algorithm::decision_tree), 4, 42, ScalerMode::per_fold,
      0, &counter);
  REQUIRE(counter.reads_per_fold.size() == 4);
  const FoldAssignment fa = make_folds(12, 4, 42);
  for (int fold = 0; fold < 4; ++fold) {
    for (int i = 0; i < 12; ++i) {
      const int reads = counter.reads_per_fold[static_cast<std::size_t>(fold)]
                                             [static_cast<std::size_t>(i)];
      if (fa.fold_of[static_cast<std::size_t>(i)] == fold) {
        REQUIRE(reads == 0);  // held-out row must stay unseen
      } else {
        REQUIRE(reads == 1);
      }
    }
  }
  CHECK(r.mean_mae >= 0.0);
}

TEST_CASE("global scaler mode is reported and differs from per-fold") {
  const FeatureMatrix fm = tiny_matrix(12, 31);
  const CVReport per_fold = cross_validate(
      fm, default_spec(Algorithm::ridge), 4, 42, ScalerMode::per_fold);
  const CVReport global = cross_validate(
      fm, default_spec(Algorithm::ridge), 4, 42, ScalerMode::global);
  CHECK(per_fold.scaler_mode == ScalerMode::per_fold);
  CHECK(global.scaler_mode == ScalerMode::global);
  CHECK(per_fold.mean_mae != global.mean_mae);
}

TEST_CASE("parallel cv equals sequential cv") {
  const FeatureMatrix fm = tiny_matrix(16, 17);
  for (Algorithm a : {Algorithm::random_forest, Algorithm::mlp, Algorithm::lasso}) {
    RegressorSpec spec = default_spec(a);
    if (a == Algorithm::random_forest) spec.forest.n_estimators = 10;
    if (a == Algorithm::mlp) spec.mlp.max_iter = 60;
    const CVReport seq = cross_validate(fm, spec, 4, 42, ScalerMode::per_fold, 0);
    const CVReport par = cross_validate(fm, spec, 4, 42, ScalerMode::per_fold, 4);
    CHECK(seq.per_fold_mae == par.per_fold_mae);
  }
}

TEST_CASE("cv propagates fit errors with the offending fold") {
  FeatureMatrix fm = tiny_matrix(8, 5);
  RegressorSpec spec = default_spec(Algorithm::knn);
  spec.knn.k = 7;  // training side has only 6 rows per fold
  CHECK_THROWS_WITH_AS(cross_validate(fm, spec, 4, 42, ScalerMode::per_fold),
                       doctest::Contains("fold"), Error);
}

TEST_CASE("grid search: single point, tie-break, and ordering") {
  const FeatureMatrix fm = tiny_matrix(10, 3);
  const int k = 5;

  // Single point reproduces plain cross-validation.
  const GridSearchResult single = grid_search(
      fm, Algorithm::ridge, {{"alpha", {"0.1"}}}, k, 42, ScalerMode::per_fold);
  const CVReport direct = cross_validate(fm, default_spec(Algorithm::ridge), k,
                                         42, ScalerMode::per_fold);
  CHECK(single.best_mean_mae == direct.mean_mae);
  CHECK(single.table.size() == 1);

  // Duplicated candidate: the first minimizer wins.
  const GridSearchResult dup = grid_search(
      fm, Algorithm::ridge, {{"alpha", {"0.1", "0.1"}}}, k, 42,
      ScalerMode::per_fold);
  CHECK(dup.table.size() == 2);
  CHECK(dup.table[0].mean_mae == dup.table[1].mean_mae);
  CHECK(dup.best_mean_mae == dup.table[0].mean_mae);

  // Enumeration order is the cartesian product in declared key order.
  const GridSearchResult pair = grid_search(
      fm, Algorithm::lasso, {{"alpha", {"0.1", "1"}}, {"max_iter", {"100", "200"}}},
      k, 42, ScalerMode::per_fold);
  REQUIRE(pair.table.size() == 4);
  CHECK(pair.table[0].assignment ==
        std::vector<std::pair<std::string, std::string>>{{"alpha", "0.1"},
                                                         {"max_iter", "100"}});
  CHECK(pair.table[1].assignment ==
        std::vector<std::pair<std::string, std::string>>{{"alpha", "0.1"},
                                                         {"max_iter", "200"}});
  CHECK(pair.table[2].assignment ==
        std::vector<std::pair<std::string, std::string>>{{"alpha", "1"},
                                                         {"max_iter", "100"}});
}

TEST_CASE("over-shrunk ridge loses the two-point grid") {
  // Strongly linear data: tiny alpha must beat a huge one.
  const FeatureMatrix fm = tiny_matrix(20, 8);
  const GridSearchResult r = grid_search(
      fm, Algorithm::ridge, {{"alpha", {"1e-9", "1e9"}}}, 5, 42,
      ScalerMode::per_fold);
  CHECK(r.table[0].mean_mae < r.table[1].mean_mae);
  CHECK(r.best_mean_mae == r.table[0].mean_mae);
  CHECK(r.best_spec.ridge.alpha == 1e-9);
}

TEST_CASE("grid search records unknown-parameter failures per combination") {
  const FeatureMatrix fm = tiny_matrix(10, 3);
  CHECK_THROWS_AS(grid_search(fm, Algorithm::ridge, {}, 5, 42,
                              ScalerMode::per_fold),
                  Error);
  CHECK_THROWS_AS(grid_search(fm, Algorithm::ridge, {{"alpha", {}}}, 5, 42,
                              ScalerMode::per_fold),
                  Error);
}

TEST_CASE("benchmark: roster order, shared folds, best flag, determinism") {
  const FeatureMatrix fm = tiny_matrix(12, 19);
  std::vector<RegressorSpec> specs = {
      default_spec(Algorithm::decision_tree),
      default_spec(Algorithm::mean_baseline),
  };
  const auto reports = benchmark_models(fm, specs, 4, 42, ScalerMode::per_fold);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].model_name == "decision_tree");
  CHECK(reports[1].model_name == "mean_baseline");
  const int best_count = static_cast<int>(reports[0].best) +
                         static_cast<int>(reports[1].best);
  CHECK(best_count == 1);
  CHECK(reports[0].best);  // the tree learns this synthetic map easily

  // A model alone must score the same as inside the shared-fold benchmark.
  const CVReport solo = cross_validate(fm, specs[0], 4, 42, ScalerMode::per_fold);
  CHECK(solo.per_fold_mae == reports[0].per_fold_mae);

  // Byte-identical serialized reruns.
  RunHeader header;
  header.dataset_digest = feature_matrix_digest(fm);
  header.n_samples = 12;
  header.n_features = 3;
  header.k = 4;
  header.seed = 42;
  header.scaler_mode = ScalerMode::per_fold;
  const auto again = benchmark_models(fm, specs, 4, 42, ScalerMode::per_fold);
  CHECK(render_report(header, reports, ReportFormat::json) ==
        render_report(header, again, ReportFormat::json));
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>

#include "cobb/error.hpp"
#include "cobb/regressors.hpp"
#include "cobb/tree.hpp"
#include "oracles.hpp"

using namespace cobb;

TEST_SUITE("tree") {

TEST_CASE("impurity hand cases") {
  CHECK(impurity(std::vector<double>{5, 5, 5}, SplitCriterion::mse) == 0.0);
  CHECK(impurity(std::vector<double>{5, 5, 5}, SplitCriterion::mae) == 0.0);
  CHECK(impurity(std::vector<double>{1, 1, 3, 3}, SplitCriterion::mse) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(impurity(std::vector<double>{0, 0, 0, 4}, SplitCriterion::mae) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(impurity(std::vector<double>{}, SplitCriterion::mse), Error);
}

TEST_CASE("best_split hand case") {
  Matrix X(4, 1);
  X << 1, 2, 3, 4;
  Vector y(4);
  y << 1, 1, 3, 3;
  const auto split = best_split(X, y, SplitCriterion::mse);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
  CHECK(split->threshold == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(split->gain == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant features yield no split") {
  Matrix X(4, 2);
  X << 1, 7, 1, 7, 1, 7, 1, 7;
  Vector y(4);
  y << 1, 2, 3, 4;
  CHECK_FALSE(best_split(X, y, SplitCriterion::mse).has_value());

  Matrix mixed(4, 2);
  mixed << 1, 1, 1, 2, 1, 3, 1, 4;
  const auto split = best_split(mixed, y, SplitCriterion::mse);
  REQUIRE(split.has_value());
  CHECK(split->feature == 1);
}

TEST_CASE("constant targets yield no split") {
  Matrix X(4, 1);
  X << 1, 2, 3, 4;
  Vector y = Vector::Constant(4, 3.0);
  CHECK_FALSE(best_split(X, y, SplitCriterion::mse).has_value());
  CHECK_FALSE(best_split(X, y, SplitCriterion::mae).has_value());
}

TEST_CASE("identical feature copies break ties to feature 0") {
  Matrix X(4, 2);
  X << 1, 1, 2, 2, 3, 3, 4, 4;
  Vector y(4);
  y << 1, 1, 3, 3;
  const auto split = best_split(X, y, SplitCriterion::mse);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
}

TEST_CASE("dimension mismatch is rejected") {
  Matrix X(3, 1);
  X << 1, 2, 3;
  Vector y(2);
  y << 1, 2;
  CHECK_THROWS_AS(best_split(X, y, SplitCriterion::mse), Error);
}

TEST_CASE("constant targets give a single leaf") {
  Matrix X(5, 2);
  X.setRandom();
  Vector y = Vector::Constant(5, 42.0);
  const TrainedModel m = fit_decision_tree(X, y, default_spec(Algorithm::decision_tree));
  const auto& state = std::get<TreeState>(m.state);
  CHECK(state.tree.nodes.size() == 1);
  CHECK(predict(m, X)(3) == 42.0);
}

TEST_CASE("depth-1 tree on the hand case predicts its leaves") {
  Matrix X(4, 1);
  X << 1, 2, 3, 4;
  Vector y(4);
  y << 1, 1, 3, 3;
  RegressorSpec spec = default_spec(Algorithm::decision_tree);
  spec.tree.max_depth = 1;
  const Vector pred = predict(fit_decision_tree(X, y, spec), X);
  CHECK(pred(0) == 1.0);
  CHECK(pred(1) == 1.0);
  CHECK(pred(2) == 3.0);
  CHECK(pred(3) == 3.0);
}

TEST_CASE("unbounded tree fits distinct rows exactly") {
  Rng rng(11);
  RegressorSpec spec = default_spec(Algorithm::decision_tree);
  spec.tree.max_depth = -1;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(19));
    const int d = 1 + static_cast<int>(rng.next_below(4));
    const Matrix X = oracles::random_matrix(rng, n, d);
    const Vector y = oracles::random_vector(rng, n, 0.0, 50.0);
    const Vector pred = predict(fit_decision_tree(X, y, spec), X);
    CHECK((pred - y).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mae criterion puts the median in the leaf") {
  Matrix X(4, 1);
  X << 1, 1, 1, 1;  // constant: no split possible
  Vector y(4);
  y << 0, 0, 0, 4;
  RegressorSpec spec = default_spec(Algorithm::decision_tree);
  spec.tree.criterion = SplitCriterion::mae;
  const Vector pred = predict(fit_decision_tree(X, y, spec), X);
  CHECK(pred(0) == 0.0);  // median of {0,0,0,4}

  RegressorSpec mse_spec = default_spec(Algorithm::decision_tree);
  const Vector mean_pred = predict(fit_decision_tree(X, y, mse_spec), X);
  CHECK(mean_pred(0) == 1.0);  // mean of the same targets
}

TEST_CASE("greedy tree matches the exhaustive oracle") {
  Rng rng(12345);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(11));
    const int d = 1 + static_cast<int>(rng.next_below(3));
    const Matrix X = oracles::random_matrix(rng, n, d);
    const Vector y = oracles::random_vector(rng, n, 10.0, 70.0);
    for (SplitCriterion crit : {SplitCriterion::mse, SplitCriterion::mae}) {
      const int depth = trial % 2 == 0 ? -1 : 3;
      RegressorSpec spec = default_spec(Algorithm::decision_tree);
      spec.tree.criterion = crit;
      spec.tree.max_depth = depth;
      const TrainedModel m = fit_decision_tree(X, y, spec);
      const oracles::NaiveTree reference = oracles::naive_tree(X, y, depth, crit);
      for (Eigen::Index i = 0; i < n; ++i) {
        REQUIRE(predict(m, X)(i) == reference.predict_row(X, i));
      }
    }
  }
}

TEST_CASE("monotone feature transforms leave partitions unchanged") {
  Rng rng(999);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_below(12));
    const int d = 2;
    const Matrix X = oracles::random_matrix(rng, n, d);
    const Vector y = oracles::random_vector(rng, n, 0.0, 40.0);

    RegressorSpec spec = default_spec(Algorithm::decision_tree);
    spec.tree.max_depth = -1;
    const Vector before = predict(fit_decision_tree(X, y, spec), X);

    Matrix warped = X;
    const int column = trial % d;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = warped(i, column);
      warped(i, column) = trial % 2 == 0 ? std::exp(v) : v * v * v;
    }
    const Vector after = predict(fit_decision_tree(warped, y, spec), warped);
    CHECK((before - after).cwiseAbs().maxCoeff() == 0.0);
  }
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>

#include "cobb/error.hpp"
#include "cobb/regressors.hpp"
#include "oracles.hpp"

using namespace cobb;

TEST_SUITE("linear") {

TEST_CASE("constant targets are absorbed by the intercept") {
  Matrix X(4, 2);
  X << 1, 2, 3, 4, 5, 6, 7, 8;
  Vector y = Vector::Constant(4, 9.0);
  const TrainedModel m = fit_linear(X, y, 0.0);
  const auto& s = std::get<LinearState>(m.state);
  CHECK(s.w.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(s.b == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("ridge 1-D closed form") {
  Matrix X(2, 1);
  X << -1, 1;
  Vector y(2);
  y << -1, 1;
  const TrainedModel m = fit_linear(X, y, 0.1);
  const auto& s = std::get<LinearState>(m.state);
  CHECK(std::abs(s.w(0) - 2.0 / 2.1) < 1e-10);
  CHECK(std::abs(s.b) < 1e-12);
}

TEST_CASE("ols matches the normal equations on full-rank data") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 6 + static_cast<int>(rng.next_below(10));
    const int d = 1 + static_cast<int>(rng.next_below(4));
    const Matrix X = oracles::random_matrix(rng, n, d);
    const Vector y = oracles::random_vector(rng, n, 0.0, 30.0);

    const TrainedModel m = fit_linear(X, y, 0.0);
    const auto& s = std::get<LinearState>(m.state);

    // Normal equations on the augmented design, solved by a different route.
    Matrix phi(n, d + 1);
    phi.col(0).setOnes();
    phi.rightCols(d) = X;
    const Vector wb =
        Eigen::LDLT<Matrix>(phi.transpose() * phi).solve(phi.transpose() * y);
    CHECK(std::abs(s.b - wb(0)) < 1e-8);
    for (int j = 0; j < d; ++j) CHECK(std::abs(s.w(j) - wb(j + 1)) < 1e-8);
  }
}

TEST_CASE("residual gradient vanishes at the ols solution") {
  Rng rng(42);
  const Matrix X = oracles::random_matrix(rng, 12, 3);
  const Vector y = oracles::random_vector(rng, 12, 0.0, 60.0);
  const TrainedModel m = fit_linear(X, y, 0.0);
  const auto& s = std::get<LinearState>(m.state);
  const Vector residual = y - (X * s.w).array().matrix() - Vector::Constant(12, s.b);
  const Vector grad = X.transpose() * residual;
  CHECK(grad.norm() < 1e-8 * (1.0 + y.norm()));
  CHECK(std::abs(residual.sum()) < 1e-8 * (1.0 + y.norm()));
}

TEST_CASE("rank-deficient design resolves to the minimum-norm solution") {
  Matrix X(4, 2);
  X << 1, 1, 2, 2, 3, 3, 4, 4;  // duplicated column
  Vector y(4);
  y << 1, 2, 3, 4;
  const TrainedModel m = fit_linear(X, y, 0.0);
  const auto& s = std::get<LinearState>(m.state);
  // Min-norm splits the slope evenly across the twin columns.
  CHECK(s.w(0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(s.w(1) == doctest::Approx(0.5).epsilon(1e-8));
  const Vector pred = predict(m, X);
  CHECK((pred - y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ridge limit approaches ols") {
  Rng rng(43);
  const Matrix X = oracles::random_matrix(rng, 10, 3);
  const Vector y = oracles::random_vector(rng, 10, 0.0, 30.0);
  const TrainedModel m0 = fit_linear(X, y, 0.0);
  const TrainedModel m1 = fit_linear(X, y, 1e-12);
  const auto& w0 = std::get<LinearState>(m0.state);
  const auto& w1 = std::get<LinearState>(m1.state);
  CHECK((w0.w - w1.w).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(std::abs(w0.b - w1.b) < 1e-6);
}

TEST_CASE("lasso 1-D soft threshold") {
  Matrix X(2, 1);
  X << -1, 1;
  Vector y(2);
  y << -1, 1;
  const TrainedModel m =
      fit_lasso(X, y, default_spec(Algorithm::lasso), 7);
  const auto& s = std::get<LinearState>(m.state);
  CHECK(std::abs(s.w(0) - 0.9) < 1e-6);
  CHECK(std::abs(s.b) < 1e-12);
  CHECK(m.converged);
}

TEST_CASE("large alpha shrinks every coefficient to zero") {
  Rng rng(44);
  const Matrix X = oracles::random_matrix(rng, 8, 3);
  const Vector y = oracles::random_vector(rng, 8, 0.0, 20.0);
  const Matrix Xc = X.rowwise() - X.colwise().mean();
  const Vector yc = y.array() - y.mean();
  const double alpha_max =
      (Xc.transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(X.rows());

  RegressorSpec spec = default_spec(Algorithm::lasso);
  spec.lasso.alpha = alpha_max * 1.0001;
  const TrainedModel m = fit_lasso(X, y, spec, 7);
  const auto& s = std::get<LinearState>(m.state);
  CHECK(s.w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.b == doctest::Approx(y.mean()).epsilon(1e-12));
}

TEST_CASE("vanishing alpha recovers ols") {
  Rng rng(45);
  const Matrix X = oracles::random_matrix(rng, 12, 2);
  const Vector y = oracles::random_vector(rng, 12, 0.0, 20.0);
  RegressorSpec spec = default_spec(Algorithm::lasso);
  spec.lasso.alpha = 1e-10;
  spec.lasso.tol = 1e-10;
  const TrainedModel lasso_model = fit_lasso(X, y, spec, 7);
  const TrainedModel ols_model = fit_linear(X, y, 0.0);
  const auto& lasso_state = std::get<LinearState>(lasso_model.state);
  const auto& ols_state = std::get<LinearState>(ols_model.state);
  CHECK((lasso_state.w - ols_state.w).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(std::abs(lasso_state.b - ols_state.b) < 1e-4);
}

TEST_CASE("lasso satisfies the soft-threshold fixed point at convergence") {
  Rng rng(46);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6 + static_cast<int>(rng.next_below(8));
    const int d = 1 + static_cast<int>(rng.next_below(4));
    const Matrix X = oracles::random_matrix(rng, n, d);
    const Vector y = oracles::random_vector(rng, n, 0.0, 25.0);
    RegressorSpec spec = default_spec(Algorithm::lasso);
    const TrainedModel m = fit_lasso(X, y, spec, trial);
    const auto& s = std::get<LinearState>(m.state);
    REQUIRE(m.converged);

    const Matrix Xc = X.rowwise() - X.colwise().mean();
    const Vector yc = y.array() - y.mean();
    const Vector residual = yc - Xc * s.w;
    for (int j = 0; j < d; ++j) {
      const double nj = static_cast<double>(n);
      const double col_sq = Xc.col(j).squaredNorm() / nj;
      const double rho = Xc.col(j).dot(residual) / nj + col_sq * s.w(j);
      const double st = rho > spec.lasso.alpha ? rho - spec.lasso.alpha
                        : rho < -spec.lasso.alpha ? rho + spec.lasso.alpha
                                                  : 0.0;
      CHECK(std::abs(st / col_sq - s.w(j)) < spec.lasso.tol * 10);
    }
  }
}

TEST_CASE("lasso flags non-convergence instead of failing") {
  Rng rng(47);
  const Matrix X = oracles::random_matrix(rng, 10, 4);
  const Vector y = oracles::random_vector(rng, 10, 0.0, 20.0);
  RegressorSpec spec = default_spec(Algorithm::lasso);
  spec.lasso.max_iter = 1;
  spec.lasso.tol = 1e-14;
  const TrainedModel m = fit_lasso(X, y, spec, 7);
  CHECK_FALSE(m.converged);
}

TEST_CASE("svr: data inside the tube keeps the zero function") {
  Matrix X(3, 1);
  X << -1, 0, 1;
  Vector y(3);
  y << 0.05, -0.02, 0.08;  // all |y| <= epsilon = 0.1
  const TrainedModel m = fit_svr(X, y, default_spec(Algorithm::svr_linear));
  const auto& s = std::get<SvrState>(m.state);
  CHECK(s.w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.b == 0.0);
  CHECK(predict(m, X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("svr 1-D hand KKT solution") {
  Matrix X(2, 1);
  X << -1, 1;
  Vector y(2);
  y << -1, 1;
  const TrainedModel m = fit_svr(X, y, default_spec(Algorithm::svr_linear));
  const auto& s = std::get<SvrState>(m.state);
  CHECK(std::abs(s.w(0) - 0.9) < 1e-9);
  CHECK(std::abs(s.b) < 1e-9);
}

TEST_CASE("svr objective matches a long-run proximal-gradient reference") {
  Rng rng(48);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(5));
    const int d = 1 + static_cast<int>(rng.next_below(2));
    const Matrix X = oracles::random_matrix(rng, n, d);
    const Vector y = oracles::random_vector(rng, n, -3.0, 3.0);
    // The comparison probes the optimizer, so both sides run far past the
    // benchmark default tolerance.
    RegressorSpec spec = default_spec(Algorithm::svr_linear);
    spec.svr.tol = 1e-12;
    spec.svr.max_sweeps = 2000000;
    const TrainedModel m = fit_svr(X, y, spec);
    const auto& s = std::get<SvrState>(m.state);

    const Vector ref = oracles::ista_svr_dual(X, y, spec.svr.c,
                                              spec.svr.epsilon, 300000);
    const double mine = oracles::svr_primal_objective(X, y, s.beta, spec.svr.c,
                                                      spec.svr.epsilon);
    const double theirs = oracles::svr_primal_objective(X, y, ref, spec.svr.c,
                                                        spec.svr.epsilon);
    CHECK(std::abs(mine - theirs) < 1e-3);
  }
}

TEST_CASE("knn: k equal to n reduces to the global mean") {
  Matrix X(4, 1);
  X << 0, 1, 2, 3;
  Vector y(4);
  y << 1, 2, 3, 10;
  RegressorSpec spec = default_spec(Algorithm::knn);
  spec.knn.k = 4;
  const TrainedModel m = fit_knn(X, y, spec);
  Matrix q(1, 1);
  q << 7.0;
  CHECK(predict(m, q)(0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("knn: exact training point with k = 1") {
  Matrix X(3, 2);
  X << 0, 0, 1, 1, 2, 2;
  Vector y(3);
  y << 5, 6, 7;
  RegressorSpec spec = default_spec(Algorithm::knn);
  spec.knn.k = 1;
  const TrainedModel m = fit_knn(X, y, spec);
  CHECK(predict(m, X)(1) == 6.0);
}

TEST_CASE("knn hand-ranked neighborhood") {
  Matrix X(4, 1);
  X << 0, 1, 2, 10;
  Vector y(4);
  y << 0, 1, 2, 9;
  const TrainedModel m = fit_knn(X, y, default_spec(Algorithm::knn));  // k = 3
  Matrix q(1, 1);
  q << 1.0;
  CHECK(predict(m, q)(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("knn predictions stay within the neighbor hull") {
  Rng rng(49);
  const Matrix X = oracles::random_matrix(rng, 20, 3);
  const Vector y = oracles::random_vector(rng, 20, 10.0, 60.0);
  const TrainedModel m = fit_knn(X, y, default_spec(Algorithm::knn));
  const Matrix Q = oracles::random_matrix(rng, 50, 3, -3.0, 3.0);
  const Vector pred = predict(m, Q);
  CHECK(pred.minCoeff() >= y.minCoeff());
  CHECK(pred.maxCoeff() <= y.maxCoeff());
}

TEST_CASE("knn rejects n < k") {
  Matrix X(2, 1);
  X << 0, 1;
  Vector y(2);
  y << 0, 1;
  CHECK_THROWS_AS(fit_knn(X, y, default_spec(Algorithm::knn)), Error);
}

TEST_CASE("mean baseline") {
  Matrix X(3, 1);
  X << 0, 1, 2;
  Vector y(3);
  y << 10, 20, 30;
  const TrainedModel m = fit_mean_baseline(X, y);
  CHECK(predict(m, X)(0) == 20.0);

  double mad = 0.0;
  for (int i = 0; i < 3; ++i) mad += std::abs(y(i) - 20.0);
  mad /= 3.0;
  double training_mae = 0.0;
  const Vector pred = predict(m, X);
  for (int i = 0; i < 3; ++i) training_mae += std::abs(pred(i) - y(i));
  training_mae /= 3.0;
  CHECK(training_mae == doctest::Approx(mad).epsilon(1e-12));
}

TEST_CASE("baseline test error obeys the triangle bound") {
  Rng rng(50);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_below(10));
    const int q = 3 + static_cast<int>(rng.next_below(10));
    const Matrix X = oracles::random_matrix(rng, n, 2);
    const Vector y = oracles::random_vector(rng, n, 0.0, 50.0);
    const Matrix Xq = oracles::random_matrix(rng, q, 2);
    const Vector yq = oracles::random_vector(rng, q, 0.0, 50.0);

    const TrainedModel m = fit_mean_baseline(X, y);
    const Vector pred = predict(m, Xq);
    double test_mae = 0.0;
    for (int i = 0; i < q; ++i) test_mae += std::abs(pred(i) - yq(i));
    test_mae /= static_cast<double>(q);

    const double test_mean = yq.mean();
    double test_mad = 0.0;
    for (int i = 0; i < q; ++i) test_mad += std::abs(yq(i) - test_mean);
    test_mad /= static_cast<double>(q);

    CHECK(test_mae >= std::abs(test_mean - y.mean()) - test_mad - 1e-12);
  }
}

}  // TEST_SUITE

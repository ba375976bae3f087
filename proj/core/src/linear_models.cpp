#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "cobb/error.hpp"
#include "cobb/regressors.hpp"
#include "cobb/rng.hpp"

namespace cobb {

namespace {

void check_xy(const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) {
    throw Error(errc::width, "fit: X rows != y length");
  }
  if (X.rows() == 0) {
    throw Error(errc::schema, "fit: empty training set");
  }
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

TrainedModel fit_linear(const Matrix& X, const Vector& y, double alpha) {
  check_xy(X, y);
  if (alpha < 0.0) throw Error(errc::config, "fit_linear: alpha must be >= 0");

  // Centering absorbs the (unpenalized) intercept exactly.
  const Vector x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Matrix Xc = X.rowwise() - x_mean.transpose();
  const Vector yc = y.array() - y_mean;

  Vector w;
  if (alpha == 0.0) {
    // Minimum-norm least squares, so rank-deficient systems stay defined.
    w = Xc.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(yc);
  } else {
    const Matrix gram =
        Xc.transpose() * Xc + alpha * Matrix::Identity(X.cols(), X.cols());
    w = Eigen::LDLT<Matrix>(gram).solve(Xc.transpose() * yc);
  }

  TrainedModel m;
  m.spec = default_spec(alpha == 0.0 ? Algorithm::linear : Algorithm::ridge);
  m.spec.ridge.alpha = alpha;
  m.n_features = static_cast<int>(X.cols());
  LinearState state;
  state.b = y_mean - x_mean.dot(w);
  state.w = std::move(w);
  m.state = std::move(state);
  return m;
}

TrainedModel fit_lasso(const Matrix& X, const Vector& y,
                       const RegressorSpec& spec, std::uint64_t seed) {
  check_xy(X, y);
  const LassoParams& p = spec.lasso;
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();

  const Vector x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Matrix Xc = X.rowwise() - x_mean.transpose();
  const Vector yc = y.array() - y_mean;

  // (1/n) ||X_j||^2 per coordinate; zero-variance columns stay at w = 0.
  Vector col_sq(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    col_sq(j) = Xc.col(j).squaredNorm() / static_cast<double>(n);
  }

  Vector w = Vector::Zero(d);
  Vector residual = yc;
  Rng rng(seed);
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);

  bool converged = false;
  for (int sweep = 0; sweep < p.max_iter; ++sweep) {
    rng.shuffle(order);  // selection = random: fresh coordinate order per sweep
    double max_change = 0.0;
    for (int j : order) {
      if (col_sq(j) == 0.0) continue;
      const double rho =
          Xc.col(j).dot(residual) / static_cast<double>(n) + col_sq(j) * w(j);
      const double w_new = soft_threshold(rho, p.alpha) / col_sq(j);
      const double delta = w_new - w(j);
      if (delta != 0.0) {
        residual -= delta * Xc.col(j);
        w(j) = w_new;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < p.tol) {
      converged = true;
      break;
    }
  }

  TrainedModel m;
  m.spec = spec;
  m.seed = seed;
  m.n_features = static_cast<int>(d);
  m.converged = converged;
  LinearState state;
  state.b = y_mean - x_mean.dot(w);
  state.w = std::move(w);
  m.state = std::move(state);
  return m;
}

// Epsilon-insensitive linear SVR solved in the dual with the bias folded
// into the kernel (k(a,b) = a.b + 1, i.e. a regularized intercept). That
// removes the equality constraint, so exact single-coordinate ascent
// applies: each beta_i maximizes -q/2 b^2 + g b - eps|b| on [-C, C] in
// closed form. Terminates when the best single-coordinate improvement of
// the dual objective over a sweep drops below tol.
TrainedModel fit_svr(const Matrix& X, const Vector& y,
                     const RegressorSpec& spec) {
  check_xy(X, y);
  const SvrParams& p = spec.svr;
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();

  Vector beta = Vector::Zero(n);
  Vector w = Vector::Zero(d);
  double b = 0.0;

  Vector q(n);  // diagonal of the augmented kernel
  for (Eigen::Index i = 0; i < n; ++i) q(i) = X.row(i).squaredNorm() + 1.0;

  auto coord_objective = [](double qi, double g, double eps, double v) {
    return -0.5 * qi * v * v + g * v - eps * std::abs(v);
  };

  bool converged = false;
  int sweeps = 0;
  for (; sweeps < p.max_sweeps; ++sweeps) {
    double max_improvement = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double f_i = X.row(i).dot(w) + b;
      const double g = y(i) - (f_i - q(i) * beta(i));
      const double cand =
          std::clamp(soft_threshold(g, p.epsilon) / q(i), -p.c, p.c);
      if (cand == beta(i)) continue;
      const double improvement =
          coord_objective(q(i), g, p.epsilon, cand) -
          coord_objective(q(i), g, p.epsilon, beta(i));
      max_improvement = std::max(max_improvement, improvement);
      const double delta = cand - beta(i);
      w += delta * X.row(i).transpose();
      b += delta;
      beta(i) = cand;
    }
    if (max_improvement < p.tol) {
      converged = true;
      break;
    }
  }

  TrainedModel m;
  m.spec = spec;
  m.n_features = static_cast<int>(d);
  m.converged = converged;
  SvrState state;
  state.beta = std::move(beta);
  state.w = std::move(w);
  state.b = b;
  m.state = std::move(state);
  return m;
}

TrainedModel fit_knn(const Matrix& X, const Vector& y,
                     const RegressorSpec& spec) {
  check_xy(X, y);
  if (spec.knn.k < 1) throw Error(errc::config, "fit_knn: k must be >= 1");
  if (X.rows() < spec.knn.k) {
    throw Error(errc::fit, "fit_knn: fewer training rows than k");
  }
  TrainedModel m;
  m.spec = spec;
  m.n_features = static_cast<int>(X.cols());
  m.state = KnnState{X, y};
  return m;
}

TrainedModel fit_mean_baseline(const Matrix& X, const Vector& y) {
  check_xy(X, y);
  TrainedModel m;
  m.spec = default_spec(Algorithm::mean_baseline);
  m.n_features = static_cast<int>(X.cols());
  m.state = MeanState{y.mean()};
  return m;
}

}  // namespace cobb

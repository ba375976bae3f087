#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Cholesky>

#include "cobb/error.hpp"
#include "cobb/regressors.hpp"

namespace cobb {

namespace {

struct GpFit {
  Vector alpha;
  double log_marginal_likelihood = 0.0;
};

Matrix dot_kernel(const Matrix& X, double sigma0_sq) {
  Matrix k = X * X.transpose();
  k.array() += sigma0_sq;
  return k;
}

/// Cholesky of K + noise I with escalating jitter (1e-10 tr/n, x10, up to
/// three escalations). Returns nothing when every attempt fails.
std::optional<GpFit> solve_gp(const Matrix& kernel, const Vector& y,
                              double noise) {
  const Eigen::Index n = kernel.rows();
  Matrix k_noisy = kernel;
  k_noisy.diagonal().array() += noise;

  const double base_jitter =
      1e-10 * k_noisy.trace() / static_cast<double>(n);
  double jitter = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Matrix k_try = k_noisy;
    if (jitter > 0.0) k_try.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(k_try);
    if (llt.info() == Eigen::Success) {
      GpFit fit;
      fit.alpha = llt.solve(y);
      double log_det = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        log_det += std::log(llt.matrixL()(i, i));
      }
      fit.log_marginal_likelihood =
          -0.5 * y.dot(fit.alpha) - log_det -
          0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
      // LLT does not flag NaN pivots, so finiteness is part of "factorized".
      if (fit.alpha.allFinite() && std::isfinite(fit.log_marginal_likelihood)) {
        return fit;
      }
    }
    jitter = jitter == 0.0 ? base_jitter : jitter * 10.0;
  }
  return std::nullopt;
}

}  // namespace

TrainedModel fit_gaussian_process(const Matrix& X, const Vector& y,
                                  const RegressorSpec& spec) {
  if (X.rows() != y.size()) {
    throw Error(errc::width, "fit_gaussian_process: X rows != y length");
  }
  if (X.rows() == 0) {
    throw Error(errc::schema, "fit_gaussian_process: empty training set");
  }
  const GpParams& p = spec.gp;

  double sigma0_sq = p.sigma0_sq;
  double noise = p.noise;
  std::optional<GpFit> fit;

  if (p.optimize == GpOptimize::coarse_grid) {
    // 13 log-spaced values 10^(-2 + t/3), t = 0..12, per hyperparameter;
    // the pair maximizing log marginal likelihood wins, ties to the
    // smallest grid indices.
    std::array<double, 13> grid;
    for (int t = 0; t < 13; ++t) {
      grid[static_cast<std::size_t>(t)] =
          std::pow(10.0, -2.0 + static_cast<double>(t) / 3.0);
    }
    double best_lml = -std::numeric_limits<double>::infinity();
    for (double s : grid) {
      const Matrix kernel = dot_kernel(X, s);
      for (double nz : grid) {
        const auto candidate = solve_gp(kernel, y, nz);
        if (candidate && candidate->log_marginal_likelihood > best_lml) {
          best_lml = candidate->log_marginal_likelihood;
          fit = candidate;
          sigma0_sq = s;
          noise = nz;
        }
      }
    }
    if (!fit) {
      throw Error(errc::fit,
                  "fit_gaussian_process: factorization failed on every grid "
                  "point");
    }
  } else {
    fit = solve_gp(dot_kernel(X, sigma0_sq), y, noise);
    if (!fit) {
      throw Error(errc::fit,
                  "fit_gaussian_process: factorization failed after jitter "
                  "escalation");
    }
  }

  TrainedModel m;
  m.spec = spec;
  m.n_features = static_cast<int>(X.cols());
  GpState state;
  state.X = X;
  state.alpha = std::move(fit->alpha);
  state.sigma0_sq = sigma0_sq;
  state.noise = noise;
  state.log_marginal_likelihood = fit->log_marginal_likelihood;
  m.state = std::move(state);
  return m;
}

}  // namespace cobb

#include <algorithm>
#include <cmath>
#include <numeric>

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

std::vector<int> bootstrap_indices(Rng& rng, int n, bool identity) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  if (identity) {
    std::iota(idx.begin(), idx.end(), 0);
  } else {
    for (int i = 0; i < n; ++i) {
      idx[static_cast<std::size_t>(i)] =
          static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    }
  }
  return idx;
}

/// Weighted bootstrap: n draws by inverse-cdf over the given weights.
std::vector<int> weighted_bootstrap(Rng& rng, std::span<const double> weights,
                                    bool identity) {
  const int n = static_cast<int>(weights.size());
  std::vector<int> idx(static_cast<std::size_t>(n));
  if (identity) {
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  }
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cdf[i] = acc;
  }
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    idx[static_cast<std::size_t>(i)] =
        static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), n - 1));
  }
  return idx;
}

/// Interpolating quantile (sorted copy, h = (n-1)p).
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

double huber_loss(std::span<const double> residuals, double delta) {
  double total = 0.0;
  for (double r : residuals) {
    const double a = std::abs(r);
    total += a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
  }
  return total / static_cast<double>(residuals.size());
}

Tree fit_tree_on_sample(const Matrix& X, const Vector& y,
                        std::span<const int> sample, const TreeFitOptions& opts) {
  // Materialize the resample so duplicated rows weigh in as duplicates.
  Matrix xs(static_cast<Eigen::Index>(sample.size()), X.cols());
  Vector ys(static_cast<Eigen::Index>(sample.size()));
  for (std::size_t i = 0; i < sample.size(); ++i) {
    xs.row(static_cast<Eigen::Index>(i)) = X.row(sample[i]);
    ys(static_cast<Eigen::Index>(i)) = y(sample[i]);
  }
  return grow_tree(xs, ys, opts);
}

}  // namespace

namespace detail {

double weighted_median(std::span<const double> values,
                       std::span<const double> weights) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  double total = 0.0;
  for (double w : weights) total += w;
  double acc = 0.0;
  for (std::size_t i : order) {
    acc += weights[i];
    if (acc >= 0.5 * total) return values[i];
  }
  return values[order.back()];
}

TrainedModel fit_random_forest(const Matrix& X, const Vector& y,
                               const RegressorSpec& spec, std::uint64_t seed,
                               const EnsembleHooks& hooks) {
  check_xy(X, y);
  const ForestParams& p = spec.forest;
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const int mtry = hooks.full_features
                       ? 0
                       : (p.max_features > 0 ? p.max_features
                                             : forest_feature_subset_size(d));

  EnsembleState state;
  state.trees.reserve(static_cast<std::size_t>(p.n_estimators));
  for (int t = 0; t < p.n_estimators; ++t) {
    Rng rng(member_seed(seed, static_cast<std::uint64_t>(t)));
    const auto sample = bootstrap_indices(rng, n, hooks.identity_sample);
    TreeFitOptions opts;
    opts.criterion = p.criterion;
    opts.max_depth = p.max_depth;
    opts.max_features = std::min(mtry, d);
    opts.feature_rng = &rng;
    state.trees.push_back(fit_tree_on_sample(X, y, sample, opts));
  }

  TrainedModel m;
  m.spec = spec;
  m.seed = seed;
  m.n_features = d;
  m.state = std::move(state);
  return m;
}

TrainedModel fit_bagging(const Matrix& X, const Vector& y,
                         const RegressorSpec& spec, std::uint64_t seed,
                         const EnsembleHooks& hooks) {
  check_xy(X, y);
  const BaggingParams& p = spec.bagging;
  const int n = static_cast<int>(X.rows());

  EnsembleState state;
  state.trees.reserve(static_cast<std::size_t>(p.n_estimators));
  for (int t = 0; t < p.n_estimators; ++t) {
    Rng rng(member_seed(seed, static_cast<std::uint64_t>(t)));
    const auto sample = bootstrap_indices(rng, n, hooks.identity_sample);
    TreeFitOptions opts;
    opts.criterion = SplitCriterion::mse;
    opts.max_depth = p.base_max_depth;
    state.trees.push_back(fit_tree_on_sample(X, y, sample, opts));
  }

  TrainedModel m;
  m.spec = spec;
  m.seed = seed;
  m.n_features = static_cast<int>(X.cols());
  m.state = std::move(state);
  return m;
}

// AdaBoost.R2 with the linear loss. Per round: weighted bootstrap, base
// tree, losses L_i = |resid_i| / max|resid|, average loss Lbar = sum w_i L_i
// over normalized weights. Lbar >= 0.5 stops boosting (the round's tree is
// kept only when it is the first); max|resid| = 0 keeps the tree with
// weight 1 and stops. Otherwise beta = Lbar/(1-Lbar), the estimator weight
// is lr*ln(1/beta) and w_i scales by beta^(lr*(1-L_i)).
TrainedModel fit_adaboost_r2(const Matrix& X, const Vector& y,
                             const RegressorSpec& spec, std::uint64_t seed,
                             const EnsembleHooks& hooks,
                             std::vector<AdaBoostRound>* trace) {
  check_xy(X, y);
  if (X.rows() < 2) {
    throw Error(errc::schema, "fit_adaboost_r2: need at least 2 rows");
  }
  const AdaBoostParams& p = spec.adaboost;
  const int n = static_cast<int>(X.rows());

  std::vector<double> weights(static_cast<std::size_t>(n),
                              1.0 / static_cast<double>(n));
  EnsembleState state;
  state.weighted_median = true;

  for (int t = 0; t < p.n_estimators; ++t) {
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (double& w : weights) w /= wsum;

    Rng rng(member_seed(seed, static_cast<std::uint64_t>(t)));
    const auto sample = weighted_bootstrap(rng, weights, hooks.identity_sample);
    TreeFitOptions opts;
    opts.criterion = SplitCriterion::mse;
    opts.max_depth = p.base_max_depth;
    Tree tree = fit_tree_on_sample(X, y, sample, opts);

    const Vector pred = tree.predict(X);
    double max_resid = 0.0;
    for (int i = 0; i < n; ++i) {
      max_resid = std::max(max_resid, std::abs(pred(i) - y(i)));
    }
    if (max_resid == 0.0) {
      state.trees.push_back(std::move(tree));
      state.weights.push_back(1.0);
      if (trace) trace->push_back({weights, 0.0, 0.0});
      break;
    }

    double avg_loss = 0.0;
    std::vector<double> losses(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      losses[static_cast<std::size_t>(i)] =
          std::abs(pred(i) - y(i)) / max_resid;
      avg_loss += weights[static_cast<std::size_t>(i)] *
                  losses[static_cast<std::size_t>(i)];
    }
    if (avg_loss >= 0.5) {
      if (state.trees.empty()) {
        state.trees.push_back(std::move(tree));
        state.weights.push_back(1.0);
      }
      if (trace) trace->push_back({weights, avg_loss, 0.0});
      break;
    }

    const double beta = avg_loss / (1.0 - avg_loss);
    state.trees.push_back(std::move(tree));
    state.weights.push_back(p.learning_rate * std::log(1.0 / beta));
    for (int i = 0; i < n; ++i) {
      weights[static_cast<std::size_t>(i)] *=
          std::pow(beta, p.learning_rate *
                             (1.0 - losses[static_cast<std::size_t>(i)]));
    }
    if (trace) {
      double norm = 0.0;
      for (double w : weights) norm += w;
      AdaBoostRound round;
      round.sample_weights = weights;
      for (double& w : round.sample_weights) w /= norm;
      round.average_loss = avg_loss;
      round.beta = beta;
      trace->push_back(std::move(round));
    }
  }

  TrainedModel m;
  m.spec = spec;
  m.seed = seed;
  m.n_features = static_cast<int>(X.cols());
  m.state = std::move(state);
  return m;
}

// Huber gradient boosting from F0 = median(y). Per round: delta is the
// huber_alpha-quantile of |residuals|, the depth-3 tree fits the clipped
// residuals, and each leaf takes the robust update median + mean of
// clipped deviations from that median before F moves by learning_rate.
TrainedModel fit_gradient_boosting(const Matrix& X, const Vector& y,
                                   const RegressorSpec& spec,
                                   std::vector<GbRound>* trace) {
  check_xy(X, y);
  if (X.rows() < 2) {
    throw Error(errc::schema, "fit_gradient_boosting: need at least 2 rows");
  }
  const GradientBoostingParams& p = spec.gb;
  const int n = static_cast<int>(X.rows());

  GradientBoostingState state;
  state.f0 = median(std::span<const double>(y.data(), static_cast<std::size_t>(n)));
  state.learning_rate = p.learning_rate;

  Vector f = Vector::Constant(n, state.f0);

  for (int round = 0; round < p.n_estimators; ++round) {
    Vector residual = y - f;
    std::vector<double> abs_resid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      abs_resid[static_cast<std::size_t>(i)] = std::abs(residual(i));
    }
    if (*std::max_element(abs_resid.begin(), abs_resid.end()) == 0.0) break;

    Vector pseudo(n);
    double delta = 0.0;
    if (p.loss == GbLoss::huber) {
      delta = quantile(abs_resid, p.huber_alpha);
      for (int i = 0; i < n; ++i) {
        pseudo(i) = std::clamp(residual(i), -delta, delta);
      }
    } else {
      pseudo = residual;
    }

    TreeFitOptions opts;
    opts.criterion = p.tree_criterion;
    opts.max_depth = p.max_depth;
    Tree tree = grow_tree(X, pseudo, opts);

    // Group rows by leaf for the terminal update.
    std::vector<int> leaf_of(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) leaf_of[static_cast<std::size_t>(i)] = tree.leaf_index(X, i);

    for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
      if (!tree.nodes[node].is_leaf()) continue;
      std::vector<double> leaf_resid;
      for (int i = 0; i < n; ++i) {
        if (leaf_of[static_cast<std::size_t>(i)] == static_cast<int>(node)) {
          leaf_resid.push_back(residual(i));
        }
      }
      if (leaf_resid.empty()) continue;
      if (p.loss == GbLoss::huber) {
        const double med = median(leaf_resid);
        double adj = 0.0;
        for (double r : leaf_resid) {
          adj += std::clamp(r - med, -delta, delta);
        }
        tree.nodes[node].value =
            med + adj / static_cast<double>(leaf_resid.size());
      } else {
        double s = 0.0;
        for (double r : leaf_resid) s += r;
        tree.nodes[node].value = s / static_cast<double>(leaf_resid.size());
      }
    }

    GbRound info;
    if (trace && p.loss == GbLoss::huber) {
      info.delta = delta;
      std::vector<double> before(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) before[static_cast<std::size_t>(i)] = residual(i);
      info.loss_before = huber_loss(before, delta);
    }

    for (int i = 0; i < n; ++i) {
      f(i) += p.learning_rate * tree.predict_row(X, i);
    }
    state.trees.push_back(std::move(tree));

    if (trace && p.loss == GbLoss::huber) {
      std::vector<double> after(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) after[static_cast<std::size_t>(i)] = y(i) - f(i);
      info.loss_after = huber_loss(after, info.delta);
      trace->push_back(info);
    }
  }

  TrainedModel m;
  m.spec = spec;
  m.n_features = static_cast<int>(X.cols());
  m.state = std::move(state);
  return m;
}

}  // namespace detail

TrainedModel fit_random_forest(const Matrix& X, const Vector& y,
                               const RegressorSpec& spec, std::uint64_t seed) {
  return detail::fit_random_forest(X, y, spec, seed, {});
}

TrainedModel fit_bagging(const Matrix& X, const Vector& y,
                         const RegressorSpec& spec, std::uint64_t seed) {
  return detail::fit_bagging(X, y, spec, seed, {});
}

TrainedModel fit_adaboost_r2(const Matrix& X, const Vector& y,
                             const RegressorSpec& spec, std::uint64_t seed) {
  return detail::fit_adaboost_r2(X, y, spec, seed, {}, nullptr);
}

TrainedModel fit_gradient_boosting(const Matrix& X, const Vector& y,
                                   const RegressorSpec& spec) {
  return detail::fit_gradient_boosting(X, y, spec, nullptr);
}

}  // namespace cobb

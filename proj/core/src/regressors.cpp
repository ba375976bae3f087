#include "cobb/regressors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cobb/error.hpp"

namespace cobb {

const std::vector<Algorithm>& algorithm_roster() {
  static const std::vector<Algorithm> roster = {
      Algorithm::knn,           Algorithm::svr_linear,
      Algorithm::random_forest, Algorithm::linear,
      Algorithm::ridge,         Algorithm::lasso,
      Algorithm::gaussian_process, Algorithm::mlp,
      Algorithm::adaboost,      Algorithm::decision_tree,
      Algorithm::bagging,       Algorithm::gradient_boosting,
      Algorithm::mean_baseline};
  return roster;
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::knn: return "knn";
    case Algorithm::svr_linear: return "svr_linear";
    case Algorithm::random_forest: return "random_forest";
    case Algorithm::linear: return "linear";
    case Algorithm::ridge: return "ridge";
    case Algorithm::lasso: return "lasso";
    case Algorithm::gaussian_process: return "gaussian_process";
    case Algorithm::mlp: return "mlp";
    case Algorithm::adaboost: return "adaboost";
    case Algorithm::decision_tree: return "decision_tree";
    case Algorithm::bagging: return "bagging";
    case Algorithm::gradient_boosting: return "gradient_boosting";
    case Algorithm::mean_baseline: return "mean_baseline";
  }
  return "?";
}

std::optional<Algorithm> algorithm_from_name(const std::string& name) {
  for (Algorithm a : algorithm_roster()) {
    if (name == algorithm_name(a)) return a;
  }
  return std::nullopt;
}

RegressorSpec default_spec(Algorithm a) {
  RegressorSpec spec;
  spec.algorithm = a;
  if (a == Algorithm::linear) spec.ridge.alpha = 0.0;
  return spec;
}

int forest_feature_subset_size(int n_features) {
  if (n_features <= 1) return 1;
  return std::max(1, static_cast<int>(std::floor(
                         std::log2(static_cast<double>(n_features)))));
}

namespace {

int parse_int(const std::string& v, const std::string& name) {
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw Error(errc::config, "invalid integer '" + v + "' for " + name);
  }
}

double parse_num(const std::string& v, const std::string& name) {
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw Error(errc::config, "invalid number '" + v + "' for " + name);
  }
}

SplitCriterion parse_criterion(const std::string& v, const std::string& name) {
  if (v == "mse") return SplitCriterion::mse;
  if (v == "mae") return SplitCriterion::mae;
  throw Error(errc::config, "invalid criterion '" + v + "' for " + name +
                                " (expected mse or mae)");
}

}  // namespace

void set_hyperparameter(RegressorSpec& spec, const std::string& name,
                        const std::string& value) {
  const auto unknown = [&]() -> Error {
    return Error(errc::config,
                 std::string("unknown hyperparameter '") + name + "' for " +
                     algorithm_name(spec.algorithm));
  };
  switch (spec.algorithm) {
    case Algorithm::knn:
      if (name == "k") spec.knn.k = parse_int(value, name);
      else throw unknown();
      break;
    case Algorithm::svr_linear:
      if (name == "C") spec.svr.c = parse_num(value, name);
      else if (name == "epsilon") spec.svr.epsilon = parse_num(value, name);
      else if (name == "tol") spec.svr.tol = parse_num(value, name);
      else throw unknown();
      break;
    case Algorithm::random_forest:
      if (name == "n_estimators") spec.forest.n_estimators = parse_int(value, name);
      else if (name == "max_depth") spec.forest.max_depth = parse_int(value, name);
      else if (name == "max_features") spec.forest.max_features = parse_int(value, name);
      else if (name == "criterion") spec.forest.criterion = parse_criterion(value, name);
      else throw unknown();
      break;
    case Algorithm::linear:
      throw unknown();
    case Algorithm::ridge:
      if (name == "alpha") spec.ridge.alpha = parse_num(value, name);
      else throw unknown();
      break;
    case Algorithm::lasso:
      if (name == "alpha") spec.lasso.alpha = parse_num(value, name);
      else if (name == "max_iter") spec.lasso.max_iter = parse_int(value, name);
      else if (name == "tol") spec.lasso.tol = parse_num(value, name);
      else throw unknown();
      break;
    case Algorithm::gaussian_process:
      if (name == "sigma0_sq") spec.gp.sigma0_sq = parse_num(value, name);
      else if (name == "noise") spec.gp.noise = parse_num(value, name);
      else if (name == "optimize") {
        if (value == "fixed") spec.gp.optimize = GpOptimize::fixed;
        else if (value == "coarse_grid") spec.gp.optimize = GpOptimize::coarse_grid;
        else throw Error(errc::config, "invalid optimize '" + value + "'");
      } else throw unknown();
      break;
    case Algorithm::mlp:
      if (name == "hidden") spec.mlp.hidden = parse_int(value, name);
      else if (name == "learning_rate_init") spec.mlp.learning_rate_init = parse_num(value, name);
      else if (name == "max_iter") spec.mlp.max_iter = parse_int(value, name);
      else if (name == "n_iter_no_change") spec.mlp.n_iter_no_change = parse_int(value, name);
      else if (name == "improvement_tol") spec.mlp.improvement_tol = parse_num(value, name);
      else if (name == "l2_alpha") spec.mlp.l2_alpha = parse_num(value, name);
      else throw unknown();
      break;
    case Algorithm::adaboost:
      if (name == "n_estimators") spec.adaboost.n_estimators = parse_int(value, name);
      else if (name == "learning_rate") spec.adaboost.learning_rate = parse_num(value, name);
      else if (name == "base_max_depth") spec.adaboost.base_max_depth = parse_int(value, name);
      else throw unknown();
      break;
    case Algorithm::decision_tree:
      if (name == "max_depth") spec.tree.max_depth = parse_int(value, name);
      else if (name == "criterion") spec.tree.criterion = parse_criterion(value, name);
      else throw unknown();
      break;
    case Algorithm::bagging:
      if (name == "n_estimators") spec.bagging.n_estimators = parse_int(value, name);
      else if (name == "base_max_depth") spec.bagging.base_max_depth = parse_int(value, name);
      else throw unknown();
      break;
    case Algorithm::gradient_boosting:
      if (name == "n_estimators") spec.gb.n_estimators = parse_int(value, name);
      else if (name == "learning_rate") spec.gb.learning_rate = parse_num(value, name);
      else if (name == "huber_alpha") spec.gb.huber_alpha = parse_num(value, name);
      else if (name == "max_depth") spec.gb.max_depth = parse_int(value, name);
      else if (name == "loss") {
        if (value == "huber") spec.gb.loss = GbLoss::huber;
        else if (value == "squared") spec.gb.loss = GbLoss::squared;
        else throw Error(errc::config, "invalid loss '" + value + "'");
      } else if (name == "tree_criterion") {
        spec.gb.tree_criterion = parse_criterion(value, name);
      } else throw unknown();
      break;
    case Algorithm::mean_baseline:
      throw unknown();
  }
}

void validate_spec(const RegressorSpec& spec) {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(errc::config, std::string("invalid spec: ") + what);
  };
  switch (spec.algorithm) {
    case Algorithm::knn:
      require(spec.knn.k >= 1, "knn k must be >= 1");
      break;
    case Algorithm::svr_linear:
      require(spec.svr.c > 0, "svr C must be > 0");
      require(spec.svr.epsilon >= 0, "svr epsilon must be >= 0");
      require(spec.svr.tol > 0, "svr tol must be > 0");
      break;
    case Algorithm::random_forest:
      require(spec.forest.n_estimators >= 1, "forest n_estimators must be >= 1");
      break;
    case Algorithm::linear:
      break;
    case Algorithm::ridge:
      require(spec.ridge.alpha >= 0, "ridge alpha must be >= 0");
      break;
    case Algorithm::lasso:
      require(spec.lasso.alpha > 0, "lasso alpha must be > 0");
      require(spec.lasso.max_iter >= 1, "lasso max_iter must be >= 1");
      require(spec.lasso.tol > 0, "lasso tol must be > 0");
      break;
    case Algorithm::gaussian_process:
      require(spec.gp.sigma0_sq > 0, "gp sigma0_sq must be > 0");
      require(spec.gp.noise >= 0, "gp noise must be >= 0");
      break;
    case Algorithm::mlp:
      require(spec.mlp.hidden >= 1, "mlp hidden must be >= 1");
      require(spec.mlp.learning_rate_init > 0, "mlp step must be > 0");
      require(spec.mlp.max_iter >= 1, "mlp max_iter must be >= 1");
      require(spec.mlp.n_iter_no_change >= 1, "mlp n_iter_no_change must be >= 1");
      require(spec.mlp.improvement_tol > 0, "mlp improvement_tol must be > 0");
      require(spec.mlp.l2_alpha >= 0, "mlp l2_alpha must be >= 0");
      break;
    case Algorithm::adaboost:
      require(spec.adaboost.n_estimators >= 1, "adaboost n_estimators must be >= 1");
      require(spec.adaboost.learning_rate > 0, "adaboost learning_rate must be > 0");
      break;
    case Algorithm::decision_tree:
      break;
    case Algorithm::bagging:
      require(spec.bagging.n_estimators >= 1, "bagging n_estimators must be >= 1");
      break;
    case Algorithm::gradient_boosting:
      require(spec.gb.n_estimators >= 1, "boosting n_estimators must be >= 1");
      require(spec.gb.learning_rate > 0, "boosting learning_rate must be > 0");
      require(spec.gb.huber_alpha > 0 && spec.gb.huber_alpha < 1,
              "huber_alpha must be in (0, 1)");
      break;
    case Algorithm::mean_baseline:
      break;
  }
}

TrainedModel fit_decision_tree(const Matrix& X, const Vector& y,
                               const RegressorSpec& spec) {
  if (X.rows() != y.size()) {
    throw Error(errc::width, "fit_decision_tree: X rows != y length");
  }
  if (X.rows() == 0) {
    throw Error(errc::schema, "fit_decision_tree: empty training set");
  }
  TreeFitOptions opts;
  opts.criterion = spec.tree.criterion;
  opts.max_depth = spec.tree.max_depth;
  TrainedModel m;
  m.spec = spec;
  m.n_features = static_cast<int>(X.cols());
  m.state = TreeState{grow_tree(X, y, opts)};
  return m;
}

TrainedModel fit_model(const Matrix& X, const Vector& y,
                       const RegressorSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  TrainedModel m;
  switch (spec.algorithm) {
    case Algorithm::knn: m = fit_knn(X, y, spec); break;
    case Algorithm::svr_linear: m = fit_svr(X, y, spec); break;
    case Algorithm::random_forest: m = fit_random_forest(X, y, spec, seed); break;
    case Algorithm::linear: m = fit_linear(X, y, 0.0); break;
    case Algorithm::ridge: m = fit_linear(X, y, spec.ridge.alpha); break;
    case Algorithm::lasso: m = fit_lasso(X, y, spec, seed); break;
    case Algorithm::gaussian_process: m = fit_gaussian_process(X, y, spec); break;
    case Algorithm::mlp: m = fit_mlp(X, y, spec, seed); break;
    case Algorithm::adaboost: m = fit_adaboost_r2(X, y, spec, seed); break;
    case Algorithm::decision_tree: m = fit_decision_tree(X, y, spec); break;
    case Algorithm::bagging: m = fit_bagging(X, y, spec, seed); break;
    case Algorithm::gradient_boosting: m = fit_gradient_boosting(X, y, spec); break;
    case Algorithm::mean_baseline: m = fit_mean_baseline(X, y); break;
  }
  m.spec = spec;
  m.seed = seed;
  return m;
}

namespace {

double predict_row(const TrainedModel& m, const Matrix& X, Eigen::Index i) {
  return std::visit(
      [&](const auto& state) -> double {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, LinearState>) {
          return X.row(i).dot(state.w) + state.b;
        } else if constexpr (std::is_same_v<T, SvrState>) {
          return X.row(i).dot(state.w) + state.b;
        } else if constexpr (std::is_same_v<T, KnnState>) {
          const int n = static_cast<int>(state.X.rows());
          std::vector<int> order(static_cast<std::size_t>(n));
          std::iota(order.begin(), order.end(), 0);
          std::vector<double> dist(static_cast<std::size_t>(n));
          for (int r = 0; r < n; ++r) {
            dist[static_cast<std::size_t>(r)] =
                (state.X.row(r) - X.row(i)).squaredNorm();
          }
          std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = dist[static_cast<std::size_t>(a)];
            const double db = dist[static_cast<std::size_t>(b)];
            if (da != db) return da < db;
            return a < b;  // distance ties go to the lower training index
          });
          const int k = m.spec.knn.k;
          double s = 0.0;
          for (int j = 0; j < k; ++j) s += state.y(order[static_cast<std::size_t>(j)]);
          return s / static_cast<double>(k);
        } else if constexpr (std::is_same_v<T, GpState>) {
          double s = 0.0;
          for (Eigen::Index r = 0; r < state.X.rows(); ++r) {
            s += state.alpha(r) *
                 (state.sigma0_sq + state.X.row(r).dot(X.row(i)));
          }
          return s;
        } else if constexpr (std::is_same_v<T, MlpState>) {
          double out = state.b2;
          for (int hid = 0; hid < state.w1.rows(); ++hid) {
            const double z = state.w1.row(hid).dot(X.row(i)) + state.b1(hid);
            out += state.w2(hid) / (1.0 + std::exp(-z));
          }
          return out;
        } else if constexpr (std::is_same_v<T, TreeState>) {
          return state.tree.predict_row(X, i);
        } else if constexpr (std::is_same_v<T, EnsembleState>) {
          const std::size_t count = state.trees.size();
          std::vector<double> preds(count);
          for (std::size_t t = 0; t < count; ++t) {
            preds[t] = state.trees[t].predict_row(X, i);
          }
          if (state.weighted_median) {
            return detail::weighted_median(preds, state.weights);
          }
          double s = 0.0;
          for (double v : preds) s += v;
          return s / static_cast<double>(count);
        } else if constexpr (std::is_same_v<T, GradientBoostingState>) {
          double out = state.f0;
          for (const Tree& t : state.trees) {
            out += state.learning_rate * t.predict_row(X, i);
          }
          return out;
        } else {
          static_assert(std::is_same_v<T, MeanState>);
          return state.mean;
        }
      },
      m.state);
}

}  // namespace

Vector predict(const TrainedModel& m, const Matrix& X) {
  if (static_cast<int>(X.cols()) != m.n_features) {
    throw Error(errc::width, "predict: input width " +
                                 std::to_string(X.cols()) +
                                 " does not match model width " +
                                 std::to_string(m.n_features));
  }
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_row(m, X, i);
  return out;
}

}  // namespace cobb

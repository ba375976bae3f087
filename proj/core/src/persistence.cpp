#include "cobb/persistence.hpp"

#include <json.hpp>

#include "cobb/error.hpp"
#include "cobb/report.hpp"

namespace cobb {

namespace {

using Json = nlohmann::ordered_json;

inline constexpr int kModelFormatVersion = 1;

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& x : j) v(i++) = x.get<double>();
  return v;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix matrix_from_json(const Json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols =
      rows == 0 ? 0 : static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]
                    .get<double>();
    }
  }
  return m;
}

Json tree_to_json(const Tree& t) {
  Json nodes = Json::array();
  for (const TreeNode& n : t.nodes) {
    nodes.push_back(Json{{"f", n.feature},
                         {"t", n.threshold},
                         {"l", n.left},
                         {"r", n.right},
                         {"v", n.value}});
  }
  return nodes;
}

Tree tree_from_json(const Json& j) {
  Tree t;
  t.nodes.reserve(j.size());
  for (const auto& n : j) {
    TreeNode node;
    node.feature = n.at("f").get<int>();
    node.threshold = n.at("t").get<double>();
    node.left = n.at("l").get<int>();
    node.right = n.at("r").get<int>();
    node.value = n.at("v").get<double>();
    t.nodes.push_back(node);
  }
  return t;
}

const char* criterion_name(SplitCriterion c) {
  return c == SplitCriterion::mse ? "mse" : "mae";
}

SplitCriterion criterion_from(const std::string& s) {
  if (s == "mse") return SplitCriterion::mse;
  if (s == "mae") return SplitCriterion::mae;
  throw Error(errc::parse, "model file: unknown criterion '" + s + "'");
}

Json spec_to_json(const RegressorSpec& s) {
  Json j;
  j["algorithm"] = algorithm_name(s.algorithm);
  switch (s.algorithm) {
    case Algorithm::knn:
      j["k"] = s.knn.k;
      break;
    case Algorithm::svr_linear:
      j["C"] = s.svr.c;
      j["epsilon"] = s.svr.epsilon;
      j["tol"] = s.svr.tol;
      break;
    case Algorithm::random_forest:
      j["n_estimators"] = s.forest.n_estimators;
      j["max_depth"] = s.forest.max_depth;
      j["criterion"] = criterion_name(s.forest.criterion);
      j["max_features"] = s.forest.max_features;
      break;
    case Algorithm::linear:
      break;
    case Algorithm::ridge:
      j["alpha"] = s.ridge.alpha;
      break;
    case Algorithm::lasso:
      j["alpha"] = s.lasso.alpha;
      j["max_iter"] = s.lasso.max_iter;
      j["tol"] = s.lasso.tol;
      break;
    case Algorithm::gaussian_process:
      j["sigma0_sq"] = s.gp.sigma0_sq;
      j["noise"] = s.gp.noise;
      j["optimize"] = s.gp.optimize == GpOptimize::fixed ? "fixed" : "coarse_grid";
      break;
    case Algorithm::mlp:
      j["hidden"] = s.mlp.hidden;
      j["learning_rate_init"] = s.mlp.learning_rate_init;
      j["max_iter"] = s.mlp.max_iter;
      j["n_iter_no_change"] = s.mlp.n_iter_no_change;
      j["improvement_tol"] = s.mlp.improvement_tol;
      j["l2_alpha"] = s.mlp.l2_alpha;
      break;
    case Algorithm::adaboost:
      j["n_estimators"] = s.adaboost.n_estimators;
      j["learning_rate"] = s.adaboost.learning_rate;
      j["base_max_depth"] = s.adaboost.base_max_depth;
      break;
    case Algorithm::decision_tree:
      j["max_depth"] = s.tree.max_depth;
      j["criterion"] = criterion_name(s.tree.criterion);
      break;
    case Algorithm::bagging:
      j["n_estimators"] = s.bagging.n_estimators;
      j["base_max_depth"] = s.bagging.base_max_depth;
      break;
    case Algorithm::gradient_boosting:
      j["loss"] = s.gb.loss == GbLoss::huber ? "huber" : "squared";
      j["huber_alpha"] = s.gb.huber_alpha;
      j["learning_rate"] = s.gb.learning_rate;
      j["max_depth"] = s.gb.max_depth;
      j["n_estimators"] = s.gb.n_estimators;
      j["tree_criterion"] = criterion_name(s.gb.tree_criterion);
      break;
    case Algorithm::mean_baseline:
      break;
  }
  return j;
}

RegressorSpec spec_from_json(const Json& j) {
  const std::string name = j.at("algorithm").get<std::string>();
  const auto alg = algorithm_from_name(name);
  if (!alg) throw Error(errc::parse, "model file: unknown algorithm '" + name + "'");
  RegressorSpec s = default_spec(*alg);
  switch (s.algorithm) {
    case Algorithm::knn:
      s.knn.k = j.at("k").get<int>();
      break;
    case Algorithm::svr_linear:
      s.svr.c = j.at("C").get<double>();
      s.svr.epsilon = j.at("epsilon").get<double>();
      s.svr.tol = j.at("tol").get<double>();
      break;
    case Algorithm::random_forest:
      s.forest.n_estimators = j.at("n_estimators").get<int>();
      s.forest.max_depth = j.at("max_depth").get<int>();
      s.forest.criterion = criterion_from(j.at("criterion").get<std::string>());
      s.forest.max_features = j.at("max_features").get<int>();
      break;
    case Algorithm::linear:
      break;
    case Algorithm::ridge:
      s.ridge.alpha = j.at("alpha").get<double>();
      break;
    case Algorithm::lasso:
      s.lasso.alpha = j.at("alpha").get<double>();
      s.lasso.max_iter = j.at("max_iter").get<int>();
      s.lasso.tol = j.at("tol").get<double>();
      break;
    case Algorithm::gaussian_process:
      s.gp.sigma0_sq = j.at("sigma0_sq").get<double>();
      s.gp.noise = j.at("noise").get<double>();
      s.gp.optimize = j.at("optimize").get<std::string>() == "fixed"
                          ? GpOptimize::fixed
                          : GpOptimize::coarse_grid;
      break;
    case Algorithm::mlp:
      s.mlp.hidden = j.at("hidden").get<int>();
      s.mlp.learning_rate_init = j.at("learning_rate_init").get<double>();
      s.mlp.max_iter = j.at("max_iter").get<int>();
      s.mlp.n_iter_no_change = j.at("n_iter_no_change").get<int>();
      s.mlp.improvement_tol = j.at("improvement_tol").get<double>();
      s.mlp.l2_alpha = j.at("l2_alpha").get<double>();
      break;
    case Algorithm::adaboost:
      s.adaboost.n_estimators = j.at("n_estimators").get<int>();
      s.adaboost.learning_rate = j.at("learning_rate").get<double>();
      s.adaboost.base_max_depth = j.at("base_max_depth").get<int>();
      break;
    case Algorithm::decision_tree:
      s.tree.max_depth = j.at("max_depth").get<int>();
      s.tree.criterion = criterion_from(j.at("criterion").get<std::string>());
      break;
    case Algorithm::bagging:
      s.bagging.n_estimators = j.at("n_estimators").get<int>();
      s.bagging.base_max_depth = j.at("base_max_depth").get<int>();
      break;
    case Algorithm::gradient_boosting:
      s.gb.loss = j.at("loss").get<std::string>() == "huber" ? GbLoss::huber
                                                             : GbLoss::squared;
      s.gb.huber_alpha = j.at("huber_alpha").get<double>();
      s.gb.learning_rate = j.at("learning_rate").get<double>();
      s.gb.max_depth = j.at("max_depth").get<int>();
      s.gb.n_estimators = j.at("n_estimators").get<int>();
      s.gb.tree_criterion =
          criterion_from(j.at("tree_criterion").get<std::string>());
      break;
    case Algorithm::mean_baseline:
      break;
  }
  return s;
}

Json state_to_json(const FittedState& state) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        Json j;
        if constexpr (std::is_same_v<T, LinearState>) {
          j["kind"] = "linear";
          j["w"] = vector_to_json(s.w);
          j["b"] = s.b;
        } else if constexpr (std::is_same_v<T, KnnState>) {
          j["kind"] = "knn";
          j["X"] = matrix_to_json(s.X);
          j["y"] = vector_to_json(s.y);
        } else if constexpr (std::is_same_v<T, SvrState>) {
          j["kind"] = "svr";
          j["beta"] = vector_to_json(s.beta);
          j["w"] = vector_to_json(s.w);
          j["b"] = s.b;
        } else if constexpr (std::is_same_v<T, GpState>) {
          j["kind"] = "gp";
          j["X"] = matrix_to_json(s.X);
          j["alpha"] = vector_to_json(s.alpha);
          j["sigma0_sq"] = s.sigma0_sq;
          j["noise"] = s.noise;
          j["log_marginal_likelihood"] = s.log_marginal_likelihood;
        } else if constexpr (std::is_same_v<T, MlpState>) {
          j["kind"] = "mlp";
          j["w1"] = matrix_to_json(s.w1);
          j["b1"] = vector_to_json(s.b1);
          j["w2"] = vector_to_json(s.w2);
          j["b2"] = s.b2;
          j["epochs_run"] = s.epochs_run;
          j["final_loss"] = s.final_loss;
        } else if constexpr (std::is_same_v<T, TreeState>) {
          j["kind"] = "tree";
          j["nodes"] = tree_to_json(s.tree);
        } else if constexpr (std::is_same_v<T, EnsembleState>) {
          j["kind"] = "ensemble";
          j["weighted_median"] = s.weighted_median;
          Json trees = Json::array();
          for (const Tree& t : s.trees) trees.push_back(tree_to_json(t));
          j["trees"] = std::move(trees);
          j["weights"] = s.weights;
        } else if constexpr (std::is_same_v<T, GradientBoostingState>) {
          j["kind"] = "gradient_boosting";
          j["f0"] = s.f0;
          j["learning_rate"] = s.learning_rate;
          Json trees = Json::array();
          for (const Tree& t : s.trees) trees.push_back(tree_to_json(t));
          j["trees"] = std::move(trees);
        } else {
          static_assert(std::is_same_v<T, MeanState>);
          j["kind"] = "mean";
          j["mean"] = s.mean;
        }
        return j;
      },
      state);
}

FittedState state_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    LinearState s;
    s.w = vector_from_json(j.at("w"));
    s.b = j.at("b").get<double>();
    return s;
  }
  if (kind == "knn") {
    KnnState s;
    s.X = matrix_from_json(j.at("X"));
    s.y = vector_from_json(j.at("y"));
    return s;
  }
  if (kind == "svr") {
    SvrState s;
    s.beta = vector_from_json(j.at("beta"));
    s.w = vector_from_json(j.at("w"));
    s.b = j.at("b").get<double>();
    return s;
  }
  if (kind == "gp") {
    GpState s;
    s.X = matrix_from_json(j.at("X"));
    s.alpha = vector_from_json(j.at("alpha"));
    s.sigma0_sq = j.at("sigma0_sq").get<double>();
    s.noise = j.at("noise").get<double>();
    s.log_marginal_likelihood = j.at("log_marginal_likelihood").get<double>();
    return s;
  }
  if (kind == "mlp") {
    MlpState s;
    s.w1 = matrix_from_json(j.at("w1"));
    s.b1 = vector_from_json(j.at("b1"));
    s.w2 = vector_from_json(j.at("w2"));
    s.b2 = j.at("b2").get<double>();
    s.epochs_run = j.at("epochs_run").get<int>();
    s.final_loss = j.at("final_loss").get<double>();
    return s;
  }
  if (kind == "tree") {
    return TreeState{tree_from_json(j.at("nodes"))};
  }
  if (kind == "ensemble") {
    EnsembleState s;
    s.weighted_median = j.at("weighted_median").get<bool>();
    for (const auto& t : j.at("trees")) s.trees.push_back(tree_from_json(t));
    s.weights = j.at("weights").get<std::vector<double>>();
    return s;
  }
  if (kind == "gradient_boosting") {
    GradientBoostingState s;
    s.f0 = j.at("f0").get<double>();
    s.learning_rate = j.at("learning_rate").get<double>();
    for (const auto& t : j.at("trees")) s.trees.push_back(tree_from_json(t));
    return s;
  }
  if (kind == "mean") {
    return MeanState{j.at("mean").get<double>()};
  }
  throw Error(errc::parse, "model file: unknown state kind '" + kind + "'");
}

}  // namespace

std::string save_model(const ModelArtifact& artifact) {
  Json j;
  j["format"] = "cobb-bench-model";
  j["format_version"] = kModelFormatVersion;
  j["artifact_version"] = kArtifactVersion;
  j["spec"] = spec_to_json(artifact.model.spec);
  j["seed"] = artifact.model.seed;
  j["n_features"] = artifact.model.n_features;
  j["converged"] = artifact.model.converged;
  j["state"] = state_to_json(artifact.model.state);
  if (artifact.scaler) {
    j["scaler"] = Json{{"mean", vector_to_json(artifact.scaler->mean)},
                       {"scale", vector_to_json(artifact.scaler->scale)}};
  } else {
    j["scaler"] = nullptr;
  }
  return j.dump(2) + "\n";
}

ModelArtifact load_model(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(errc::parse, std::string("model file: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "cobb-bench-model") {
      throw Error(errc::parse, "model file: unrecognized format tag");
    }
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(errc::parse, "model file: unsupported format_version");
    }
    ModelArtifact artifact;
    artifact.model.spec = spec_from_json(j.at("spec"));
    artifact.model.seed = j.at("seed").get<std::uint64_t>();
    artifact.model.n_features = j.at("n_features").get<int>();
    artifact.model.converged = j.at("converged").get<bool>();
    artifact.model.state = state_from_json(j.at("state"));
    if (!j.at("scaler").is_null()) {
      ScalerParams p;
      p.mean = vector_from_json(j.at("scaler").at("mean"));
      p.scale = vector_from_json(j.at("scaler").at("scale"));
      artifact.scaler = std::move(p);
    }
    return artifact;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(errc::parse, std::string("model file: ") + e.what());
  }
}

}  // namespace cobb

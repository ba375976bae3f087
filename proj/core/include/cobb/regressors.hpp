#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cobb/features.hpp"
#include "cobb/tree.hpp"

namespace cobb {

enum class Algorithm {
  knn,
  svr_linear,
  random_forest,
  linear,
  ridge,
  lasso,
  gaussian_process,
  mlp,
  adaboost,
  decision_tree,
  bagging,
  gradient_boosting,
  mean_baseline,
};

/// The twelve study algorithms in report order, baseline last.
const std::vector<Algorithm>& algorithm_roster();

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(const std::string& name);

// Per-algorithm hyperparameters. Defaults pin every value the study table
// gives plus the reference-toolkit defaults it leaves implicit; the full
// ledger lives in the README.

struct KnnParams {
  int k = 3;
};

struct SvrParams {
  double c = 100.0;
  double epsilon = 0.1;
  double tol = 1e-3;
  int max_sweeps = 100000;  // safety cap, not a tuning knob
};

struct ForestParams {
  int n_estimators = 100;
  int max_depth = 15;
  SplitCriterion criterion = SplitCriterion::mae;
  int max_features = 0;  // 0 = floor(log2 d)
};

struct RidgeParams {
  double alpha = 0.1;
};

struct LassoParams {
  double alpha = 0.1;
  int max_iter = 10000;
  double tol = 1e-4;
};

enum class GpOptimize { fixed, coarse_grid };

struct GpParams {
  double sigma0_sq = 1.0;
  double noise = 1.0;
  GpOptimize optimize = GpOptimize::coarse_grid;
};

struct MlpParams {
  int hidden = 60;
  double learning_rate_init = 0.003;
  int max_iter = 1000;
  int n_iter_no_change = 10;
  double improvement_tol = 1e-4;
  double l2_alpha = 1e-4;
};

struct AdaBoostParams {
  int n_estimators = 250;
  double learning_rate = 1.1;
  int base_max_depth = 3;
};

struct TreeParams {
  int max_depth = 4;
  SplitCriterion criterion = SplitCriterion::mse;
};

struct BaggingParams {
  int n_estimators = 20;
  int base_max_depth = -1;  // unbounded base trees
};

enum class GbLoss { huber, squared };

struct GradientBoostingParams {
  GbLoss loss = GbLoss::huber;
  double huber_alpha = 0.85;
  double learning_rate = 1.0;
  int max_depth = 3;
  int n_estimators = 100;
  SplitCriterion tree_criterion = SplitCriterion::mae;
};

struct RegressorSpec {
  Algorithm algorithm = Algorithm::decision_tree;
  KnnParams knn;
  SvrParams svr;
  ForestParams forest;
  RidgeParams ridge;
  LassoParams lasso;
  GpParams gp;
  MlpParams mlp;
  AdaBoostParams adaboost;
  TreeParams tree;
  BaggingParams bagging;
  GradientBoostingParams gb;
};

RegressorSpec default_spec(Algorithm a);

/// Overrides one hyperparameter of spec.algorithm by canonical name (the
/// grid-search entry point). Numeric knobs take numbers; criterion/loss
/// knobs take strings. Throws on unknown names.
void set_hyperparameter(RegressorSpec& spec, const std::string& name,
                        const std::string& value);

/// Throws cobb::Error when a hyperparameter of the active algorithm is out
/// of range (counts < 1, non-positive strengths/tolerances, huber quantile
/// outside (0,1)). fit_model runs this before dispatching.
void validate_spec(const RegressorSpec& spec);

/// Forest feature-subset size: floor(log2 d), at least 1.
int forest_feature_subset_size(int n_features);

// Fitted state per algorithm family.

struct LinearState {
  Vector w;
  double b = 0.0;
};

struct KnnState {
  Matrix X;
  Vector y;
};

struct SvrState {
  Vector beta;  // dual coefficients, one per training row
  Vector w;
  double b = 0.0;
};

struct GpState {
  Matrix X;
  Vector alpha;  // (K + noise I)^-1 y
  double sigma0_sq = 1.0;
  double noise = 1.0;
  double log_marginal_likelihood = 0.0;
};

struct MlpState {
  Matrix w1;  // hidden x d
  Vector b1;
  Vector w2;  // hidden
  double b2 = 0.0;
  int epochs_run = 0;
  double final_loss = 0.0;
};

struct TreeState {
  Tree tree;
};

struct EnsembleState {
  std::vector<Tree> trees;
  std::vector<double> weights;  // adaboost estimator weights; empty => mean
  bool weighted_median = false;
};

struct GradientBoostingState {
  double f0 = 0.0;
  double learning_rate = 1.0;
  std::vector<Tree> trees;
};

struct MeanState {
  double mean = 0.0;
};

using FittedState = std::variant<LinearState, KnnState, SvrState, GpState,
                                 MlpState, TreeState, EnsembleState,
                                 GradientBoostingState, MeanState>;

struct TrainedModel {
  RegressorSpec spec;
  std::uint64_t seed = 0;
  int n_features = 0;
  bool converged = true;  // lasso/svr iteration-cap flag
  FittedState state;
};

/// Dispatches to the per-algorithm fit. Deterministic given (spec, seed,
/// data). Throws cobb::Error on dimension mismatches and fit failures.
TrainedModel fit_model(const Matrix& X, const Vector& y,
                       const RegressorSpec& spec, std::uint64_t seed);

/// Deterministic, finite predictions; throws on feature-width mismatch.
Vector predict(const TrainedModel& m, const Matrix& X);

// Direct per-algorithm entry points (fit_model wraps these).
TrainedModel fit_knn(const Matrix& X, const Vector& y, const RegressorSpec& spec);
TrainedModel fit_linear(const Matrix& X, const Vector& y, double alpha);
TrainedModel fit_lasso(const Matrix& X, const Vector& y,
                       const RegressorSpec& spec, std::uint64_t seed);
TrainedModel fit_svr(const Matrix& X, const Vector& y, const RegressorSpec& spec);
TrainedModel fit_gaussian_process(const Matrix& X, const Vector& y,
                                  const RegressorSpec& spec);
TrainedModel fit_mlp(const Matrix& X, const Vector& y, const RegressorSpec& spec,
                     std::uint64_t seed);
TrainedModel fit_adaboost_r2(const Matrix& X, const Vector& y,
                             const RegressorSpec& spec, std::uint64_t seed);
TrainedModel fit_random_forest(const Matrix& X, const Vector& y,
                               const RegressorSpec& spec, std::uint64_t seed);
TrainedModel fit_bagging(const Matrix& X, const Vector& y,
                         const RegressorSpec& spec, std::uint64_t seed);
TrainedModel fit_gradient_boosting(const Matrix& X, const Vector& y,
                                   const RegressorSpec& spec);
TrainedModel fit_decision_tree(const Matrix& X, const Vector& y,
                               const RegressorSpec& spec);
TrainedModel fit_mean_baseline(const Matrix& X, const Vector& y);

namespace detail {

/// Test hooks: identity_sample swaps every bootstrap draw for 0..n-1,
/// full_features lifts the forest's per-split feature restriction.
struct EnsembleHooks {
  bool identity_sample = false;
  bool full_features = false;
};

struct AdaBoostRound {
  std::vector<double> sample_weights;  // normalized, after the round's update
  double average_loss = 0.0;
  double beta = 0.0;
};

struct GbRound {
  double delta = 0.0;
  double loss_before = 0.0;
  double loss_after = 0.0;
};

TrainedModel fit_adaboost_r2(const Matrix& X, const Vector& y,
                             const RegressorSpec& spec, std::uint64_t seed,
                             const EnsembleHooks& hooks,
                             std::vector<AdaBoostRound>* trace);
TrainedModel fit_random_forest(const Matrix& X, const Vector& y,
                               const RegressorSpec& spec, std::uint64_t seed,
                               const EnsembleHooks& hooks);
TrainedModel fit_bagging(const Matrix& X, const Vector& y,
                         const RegressorSpec& spec, std::uint64_t seed,
                         const EnsembleHooks& hooks);
TrainedModel fit_gradient_boosting(const Matrix& X, const Vector& y,
                                   const RegressorSpec& spec,
                                   std::vector<GbRound>* trace);

/// Loss and analytic gradient of the MLP objective at the given parameters;
/// exposed for the finite-difference check.
struct MlpGradient {
  double loss = 0.0;
  Matrix gw1;
  Vector gb1;
  Vector gw2;
  double gb2 = 0.0;
};
MlpGradient mlp_loss_gradient(const Matrix& X, const Vector& y,
                              const MlpState& params, double l2_alpha);

/// Weighted median under (value, weight) pairs: smallest value whose
/// cumulative weight reaches half the total, values sorted ascending with
/// index tie-break.
double weighted_median(std::span<const double> values,
                       std::span<const double> weights);

}  // namespace detail

}  // namespace cobb

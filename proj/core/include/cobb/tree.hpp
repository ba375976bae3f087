#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cobb/features.hpp"
#include "cobb/rng.hpp"

namespace cobb {

enum class SplitCriterion { mse, mae };

/// Variance reduction (mse) or reduction of mean absolute deviation around
/// the median (mae). Throws on empty input.
double impurity(std::span<const double> targets, SplitCriterion criterion);

struct SplitCandidate {
  int feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Flat node storage; leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict_row(const Matrix& X, Eigen::Index row) const;
  Vector predict(const Matrix& X) const;

  /// Index of the leaf a row lands in; used by the boosting terminal update.
  int leaf_index(const Matrix& X, Eigen::Index row) const;
};

struct TreeFitOptions {
  SplitCriterion criterion = SplitCriterion::mse;
  int max_depth = -1;               // -1 = unbounded
  int max_features = 0;             // 0 = all, otherwise per-split subset size
  Rng* feature_rng = nullptr;       // required when max_features > 0
};

/// Exhaustive greedy split over the given rows. Candidate thresholds are
/// midpoints between consecutive distinct sorted values per feature; the
/// gain is the weighted impurity decrease. Ties go to the smallest feature
/// index, then the smallest sorted split position (strict improvement
/// scan). Returns nothing when no candidate has positive gain.
std::optional<SplitCandidate> best_split(const Matrix& X, const Vector& y,
                                         std::span<const int> rows,
                                         std::span<const int> features,
                                         SplitCriterion criterion);

/// All-rows, all-features convenience overload.
std::optional<SplitCandidate> best_split(const Matrix& X, const Vector& y,
                                         SplitCriterion criterion);

/// Greedy recursive growth; stops at max_depth, node size < 2, or no
/// positive-gain split. Leaf value is the mean of its targets under mse and
/// the median under mae. With max_features > 0 each split draws a fresh
/// feature subset from feature_rng.
Tree grow_tree(const Matrix& X, const Vector& y, const TreeFitOptions& opts);

Tree grow_tree(const Matrix& X, const Vector& y, std::span<const int> rows,
               const TreeFitOptions& opts);

/// Mean, or median under mae (even counts average the two middle values).
double leaf_value(std::span<const double> targets, SplitCriterion criterion);

double median(std::span<const double> values);

}  // namespace cobb

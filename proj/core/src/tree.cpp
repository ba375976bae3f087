#include "cobb/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "cobb/error.hpp"

namespace cobb {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double population_variance(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size());
}

double median_sorted(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2]
                    : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

/// Mean absolute deviation around the median; sorts its scratch argument.
double mad_around_median(std::vector<double>& scratch) {
  std::sort(scratch.begin(), scratch.end());
  const double med = median_sorted(scratch);
  double s = 0.0;
  for (double x : scratch) s += std::abs(x - med);
  return s / static_cast<double>(scratch.size());
}

}  // namespace

double median(std::span<const double> values) {
  if (values.empty()) throw Error(errc::schema, "median: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return median_sorted(sorted);
}

double impurity(std::span<const double> targets, SplitCriterion criterion) {
  if (targets.empty()) throw Error(errc::schema, "impurity: empty input");
  if (criterion == SplitCriterion::mse) return population_variance(targets);
  std::vector<double> scratch(targets.begin(), targets.end());
  return mad_around_median(scratch);
}

double leaf_value(std::span<const double> targets, SplitCriterion criterion) {
  if (targets.empty()) throw Error(errc::schema, "leaf_value: empty input");
  return criterion == SplitCriterion::mse ? mean_of(targets) : median(targets);
}

double Tree::predict_row(const Matrix& X, Eigen::Index row) const {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = X(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

Vector Tree::predict(const Matrix& X) const {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_row(X, i);
  return out;
}

int Tree::leaf_index(const Matrix& X, Eigen::Index row) const {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = X(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return node;
}

std::optional<SplitCandidate> best_split(const Matrix& X, const Vector& y,
                                         std::span<const int> rows,
                                         std::span<const int> features,
                                         SplitCriterion criterion) {
  if (X.rows() != y.size()) {
    throw Error(errc::width, "best_split: X rows != y length");
  }
  const std::size_t n = rows.size();
  if (n < 2) return std::nullopt;

  std::vector<double> node_targets(n);
  for (std::size_t i = 0; i < n; ++i) node_targets[i] = y(rows[i]);
  const double parent = impurity(node_targets, criterion);

  std::optional<SplitCandidate> best;
  double best_gain = 0.0;

  std::vector<int> sorted(rows.begin(), rows.end());
  std::vector<double> left_t, right_t;
  left_t.reserve(n);
  right_t.reserve(n);

  for (int f : features) {
    std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
      const double xa = X(a, f), xb = X(b, f);
      if (xa != xb) return xa < xb;
      return a < b;
    });
    if (X(sorted.front(), f) == X(sorted.back(), f)) continue;  // constant

    if (criterion == SplitCriterion::mse) {
      // One pass with prefix sums; impurity via sum of squared deviations.
      double total = 0.0, total_sq = 0.0;
      for (int r : sorted) {
        total += y(r);
        total_sq += y(r) * y(r);
      }
      double sum_l = 0.0, sq_l = 0.0;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        const int r = sorted[p];
        sum_l += y(r);
        sq_l += y(r) * y(r);
        const double a = X(r, f);
        const double b = X(sorted[p + 1], f);
        if (a == b) continue;
        const double nl = static_cast<double>(p + 1);
        const double nr = static_cast<double>(n - p - 1);
        const double var_l = std::max(0.0, (sq_l - sum_l * sum_l / nl) / nl);
        const double sum_r = total - sum_l;
        const double sq_r = total_sq - sq_l;
        const double var_r = std::max(0.0, (sq_r - sum_r * sum_r / nr) / nr);
        const double gain =
            parent - (nl / static_cast<double>(n)) * var_l -
            (nr / static_cast<double>(n)) * var_r;
        if (gain > best_gain) {
          double thr = a + (b - a) * 0.5;
          if (thr >= b) thr = a;  // keep routing consistent at 1-ulp gaps
          best_gain = gain;
          best = SplitCandidate{f, thr, gain};
        }
      }
    } else {
      for (std::size_t p = 0; p + 1 < n; ++p) {
        const double a = X(sorted[p], f);
        const double b = X(sorted[p + 1], f);
        if (a == b) continue;
        left_t.clear();
        right_t.clear();
        for (std::size_t i = 0; i <= p; ++i) left_t.push_back(y(sorted[i]));
        for (std::size_t i = p + 1; i < n; ++i) right_t.push_back(y(sorted[i]));
        const double nl = static_cast<double>(left_t.size());
        const double nr = static_cast<double>(right_t.size());
        const double gain = parent -
                            (nl / static_cast<double>(n)) *
                                mad_around_median(left_t) -
                            (nr / static_cast<double>(n)) *
                                mad_around_median(right_t);
        if (gain > best_gain) {
          double thr = a + (b - a) * 0.5;
          if (thr >= b) thr = a;
          best_gain = gain;
          best = SplitCandidate{f, thr, gain};
        }
      }
    }
  }
  return best;
}

std::optional<SplitCandidate> best_split(const Matrix& X, const Vector& y,
                                         SplitCriterion criterion) {
  std::vector<int> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<int> features(static_cast<std::size_t>(X.cols()));
  std::iota(features.begin(), features.end(), 0);
  return best_split(X, y, rows, features, criterion);
}

Tree grow_tree(const Matrix& X, const Vector& y, std::span<const int> rows,
               const TreeFitOptions& opts) {
  if (X.rows() != y.size()) {
    throw Error(errc::width, "grow_tree: X rows != y length");
  }
  if (rows.empty()) {
    throw Error(errc::schema, "grow_tree: no rows");
  }
  if (opts.max_features > 0 && opts.feature_rng == nullptr) {
    throw Error(errc::fit, "grow_tree: max_features requires a feature rng");
  }
  const int d = static_cast<int>(X.cols());
  std::vector<int> all_features(static_cast<std::size_t>(d));
  std::iota(all_features.begin(), all_features.end(), 0);

  Tree tree;
  std::vector<double> targets;

  std::function<int(std::vector<int>&, int)> build =
      [&](std::vector<int>& node_rows, int depth) -> int {
    targets.assign(node_rows.size(), 0.0);
    for (std::size_t i = 0; i < node_rows.size(); ++i) {
      targets[i] = y(node_rows[i]);
    }

    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.back().value = leaf_value(targets, opts.criterion);

    const bool depth_ok = opts.max_depth < 0 || depth < opts.max_depth;
    if (!depth_ok || node_rows.size() < 2) return index;

    std::optional<SplitCandidate> split;
    if (opts.max_features > 0 && opts.max_features < d) {
      std::vector<int> subset =
          opts.feature_rng->sample_without_replacement(d, opts.max_features);
      std::sort(subset.begin(), subset.end());
      split = best_split(X, y, node_rows, subset, opts.criterion);
    } else {
      split = best_split(X, y, node_rows, all_features, opts.criterion);
    }
    if (!split) return index;

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(node_rows.size());
    right_rows.reserve(node_rows.size());
    for (int r : node_rows) {
      (X(r, split->feature) <= split->threshold ? left_rows : right_rows)
          .push_back(r);
    }
    node_rows.clear();
    node_rows.shrink_to_fit();

    tree.nodes[static_cast<std::size_t>(index)].feature = split->feature;
    tree.nodes[static_cast<std::size_t>(index)].threshold = split->threshold;
    const int left = build(left_rows, depth + 1);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    const int right = build(right_rows, depth + 1);
    tree.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  };

  std::vector<int> root_rows(rows.begin(), rows.end());
  build(root_rows, 0);
  return tree;
}

Tree grow_tree(const Matrix& X, const Vector& y, const TreeFitOptions& opts) {
  std::vector<int> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return grow_tree(X, y, rows, opts);
}

}  // namespace cobb

#include "treeging/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "treeging/errors.hpp"

namespace treeging {

std::size_t default_mtry(std::size_t n_features) {
  return std::max<std::size_t>(1, (n_features + 2) / 3);
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeConfig& config,
              std::size_t mtry)
      : x_(x), y_(y), config_(config), mtry_(mtry), rng_(config.seed) {
    features_.resize(static_cast<std::size_t>(x.cols()));
    std::iota(features_.begin(), features_.end(), 0);
  }

  std::vector<RegressionTree::Node> build() {
    std::vector<std::size_t> rows(static_cast<std::size_t>(x_.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t>& rows, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    double mean = 0.0;
    for (auto r : rows) mean += y_[static_cast<Eigen::Index>(r)];
    mean /= static_cast<double>(rows.size());

    Split split;
    const bool may_split = rows.size() >= 2 * config_.min_node_size &&
                           (!config_.max_depth || depth < *config_.max_depth);
    if (may_split) split = best_split(rows, mean);

    if (split.feature < 0) {
      auto& node = nodes_[static_cast<std::size_t>(id)];
      node.leaf = n_leaves_++;
      node.value = mean;
      return id;
    }

    std::vector<std::size_t> left, right;
    for (auto r : rows)
      (x_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  std::vector<int> candidate_features() {
    if (mtry_ >= features_.size()) return features_;
    // Partial Fisher-Yates; the drawn subset is then visited in index order.
    std::vector<int> pool = features_;
    for (std::size_t k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng_)]);
    }
    pool.resize(mtry_);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Split best_split(const std::vector<std::size_t>& rows, double mean) {
    const std::size_t n = rows.size();
    double parent_sse = 0.0;
    for (auto r : rows) {
      const double d = y_[static_cast<Eigen::Index>(r)] - mean;
      parent_sse += d * d;
    }
    Split best;
    if (!(parent_sse > 0.0)) return best;
    const double tol = 1e-12 * parent_sse;
    const std::size_t min_child = std::max<std::size_t>(1, config_.min_node_size);

    std::vector<std::pair<double, double>> vals(n);  // (feature value, centered y)
    for (int f : candidate_features()) {
      for (std::size_t k = 0; k < n; ++k) {
        const auto r = static_cast<Eigen::Index>(rows[k]);
        vals[k] = {x_(r, f), y_[r] - mean};
      }
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      const double total = std::accumulate(vals.begin(), vals.end(), 0.0,
                                           [](double s, const auto& v) { return s + v.second; });
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_sum += vals[k].second;
        const std::size_t nl = k + 1, nr = n - nl;
        if (nl < min_child) continue;
        if (nr < min_child) break;
        if (!(vals[k].first < vals[k + 1].first)) continue;
        const double right_sum = total - left_sum;
        // SSE reduction for centered responses.
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr);
        if (gain > best.gain + tol) {
          double thr = 0.5 * (vals[k].first + vals[k + 1].first);
          if (!(thr < vals[k + 1].first)) thr = vals[k].first;
          best = {f, thr, gain};
        }
      }
    }
    if (best.feature >= 0 && !(best.gain > tol)) best = Split{};
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  const TreeConfig& config_;
  std::size_t mtry_;
  std::mt19937_64 rng_;
  std::vector<int> features_;
  std::vector<RegressionTree::Node> nodes_;
  int n_leaves_ = 0;
};

}  // namespace

RegressionTree fit_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                        const TreeConfig& config) {
  if (features.rows() == 0 || y.size() == 0)
    fail(ErrorKind::insufficient_data, "cannot fit a tree to empty data");
  if (features.rows() != y.size()) fail(ErrorKind::shape, "feature rows do not match response length");
  if (features.cols() == 0) fail(ErrorKind::shape, "tree needs at least one feature");
  if (config.min_node_size < 1) fail(ErrorKind::config, "min_node_size must be >= 1");
  if (static_cast<std::size_t>(y.size()) < config.min_node_size)
    fail(ErrorKind::insufficient_data, "fewer rows than min_node_size");
  const auto q = static_cast<std::size_t>(features.cols());
  const std::size_t mtry = config.mtry.value_or(default_mtry(q));
  if (mtry < 1 || mtry > q)
    fail(ErrorKind::config, "mtry must lie in [1, " + std::to_string(q) + "]");

  RegressionTree tree;
  tree.nodes_ = TreeBuilder(features, y, config, mtry).build();
  tree.n_features_ = q;
  tree.n_leaves_ = static_cast<std::size_t>(
      std::count_if(tree.nodes_.begin(), tree.nodes_.end(), [](const auto& n) { return n.is_leaf(); }));
  return tree;
}

RegressionTree RegressionTree::from_nodes(std::vector<Node> nodes, std::size_t n_features) {
  if (nodes.empty()) fail(ErrorKind::validation, "tree has no nodes");
  std::vector<int> seen_leaf(nodes.size(), 0);
  std::size_t leaves = 0;
  const int count = static_cast<int>(nodes.size());
  for (const auto& node : nodes) {
    if (node.is_leaf()) {
      if (node.leaf < 0 || node.leaf >= count || seen_leaf[static_cast<std::size_t>(node.leaf)]++)
        fail(ErrorKind::validation, "tree leaf indices are not a permutation");
      ++leaves;
    } else {
      if (node.feature >= static_cast<int>(n_features) || node.left <= 0 || node.right <= 0 ||
          node.left >= count || node.right >= count)
        fail(ErrorKind::validation, "tree split node is malformed");
    }
  }
  for (std::size_t l = 0; l < leaves; ++l)
    if (!seen_leaf[l]) fail(ErrorKind::validation, "tree leaf indices are not contiguous");
  RegressionTree t;
  t.nodes_ = std::move(nodes);
  t.n_leaves_ = leaves;
  t.n_features_ = n_features;
  return t;
}

template <typename Get>
std::size_t RegressionTree::route(Get&& get) const {
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const auto& n = nodes_[id];
    id = static_cast<std::size_t>(get(n.feature) <= n.threshold ? n.left : n.right);
  }
  return static_cast<std::size_t>(nodes_[id].leaf);
}

void RegressionTree::check_columns(Eigen::Index cols) const {
  if (static_cast<std::size_t>(cols) != n_features_)
    fail(ErrorKind::shape, "tree expects " + std::to_string(n_features_) + " features, got " +
                               std::to_string(cols));
}

std::size_t RegressionTree::leaf_index(std::span<const double> row) const {
  check_columns(static_cast<Eigen::Index>(row.size()));
  return route([&](int f) { return row[static_cast<std::size_t>(f)]; });
}

std::size_t RegressionTree::leaf_index(const Eigen::MatrixXd& X, Eigen::Index row) const {
  check_columns(X.cols());
  return route([&](int f) { return X(row, f); });
}

Eigen::VectorXd RegressionTree::leaf_values() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n_leaves_));
  for (const auto& n : nodes_)
    if (n.is_leaf()) v[n.leaf] = n.value;
  return v;
}

Eigen::VectorXd RegressionTree::predict(const Eigen::MatrixXd& X) const {
  check_columns(X.cols());
  const Eigen::VectorXd values = leaf_values();
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out[i] = values[static_cast<Eigen::Index>(route([&](int f) { return X(i, f); }))];
  return out;
}

Eigen::SparseMatrix<double> RegressionTree::design_matrix(const Eigen::MatrixXd& X) const {
  check_columns(X.cols());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    entries.emplace_back(i, static_cast<Eigen::Index>(route([&](int f) { return X(i, f); })), 1.0);
  Eigen::SparseMatrix<double> m(X.rows(), static_cast<Eigen::Index>(n_leaves_));
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

}  // namespace treeging

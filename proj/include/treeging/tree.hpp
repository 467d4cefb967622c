#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace treeging {

struct TreeConfig {
  std::size_t min_node_size = 5;
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::optional<std::size_t> mtry;       // default_mtry(q) when empty
  std::uint64_t seed = 0;
};

// max(1, ceil(q / 3)).
std::size_t default_mtry(std::size_t n_features);

// CART regression tree with constant leaves. Nodes are stored flat in
// pre-order; leaves are numbered 0..L-1 in the same order.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // < 0 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf = -1;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
  };

  RegressionTree() = default;

  // Rebuilds a tree from stored nodes; validates the structure.
  static RegressionTree from_nodes(std::vector<Node> nodes, std::size_t n_features);

  std::size_t n_leaves() const noexcept { return n_leaves_; }
  std::size_t n_features() const noexcept { return n_features_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  // Routing rule: go left iff value <= threshold.
  std::size_t leaf_index(std::span<const double> row) const;
  std::size_t leaf_index(const Eigen::MatrixXd& X, Eigen::Index row) const;

  Eigen::VectorXd leaf_values() const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  // n x L one-hot leaf indicator matrix.
  Eigen::SparseMatrix<double> design_matrix(const Eigen::MatrixXd& X) const;

 private:
  friend RegressionTree fit_tree(const Eigen::MatrixXd&, const Eigen::VectorXd&, const TreeConfig&);

  template <typename Get>
  std::size_t route(Get&& get) const;
  void check_columns(Eigen::Index cols) const;

  std::vector<Node> nodes_;
  std::size_t n_leaves_ = 0;
  std::size_t n_features_ = 0;
};

// Greedy variance-reduction fit. Split candidates are midpoints between
// consecutive distinct sorted values of mtry randomly chosen features; ties go
// to the lowest feature index, then the lowest threshold.
RegressionTree fit_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                        const TreeConfig& config);

}  // namespace treeging

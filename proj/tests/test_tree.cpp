#include <doctest.h>

#include <random>

#include "treeging/errors.hpp"
#include "treeging/tree.hpp"

using namespace treeging;

namespace {

struct Step {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

// y = 1[x1 > 0], x1 in {-1, +1}, plus a noise feature
Step step_data() {
  Step s;
  s.X.resize(10, 2);
  s.y.resize(10);
  for (int i = 0; i < 10; ++i) {
    s.X(i, 0) = i % 2 ? 1.0 : -1.0;
    s.X(i, 1) = 0.1 * i;
    s.y[i] = i % 2 ? 1.0 : 0.0;
  }
  return s;
}

TreeConfig all_features(std::size_t q, std::size_t min_node = 5) {
  TreeConfig c;
  c.mtry = q;
  c.min_node_size = min_node;
  c.seed = 3;
  return c;
}

// SSE after the best single split, by brute force over both features and all
// cut points
double best_split_sse(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int& feature, double& cut) {
  double best = 1e300;
  for (int f = 0; f < X.cols(); ++f)
    for (int k = 0; k < X.rows(); ++k) {
      const double c = X(k, f);
      double sl = 0, sr = 0, ql = 0, qr = 0, nl = 0, nr = 0;
      for (int i = 0; i < X.rows(); ++i) {
        if (X(i, f) <= c) {
          sl += y[i], ql += y[i] * y[i], ++nl;
        } else {
          sr += y[i], qr += y[i] * y[i], ++nr;
        }
      }
      if (nl == 0 || nr == 0) continue;
      const double sse = ql - sl * sl / nl + qr - sr * sr / nr;
      if (sse < best - 1e-12) {
        best = sse;
        feature = f;
        cut = c;
      }
    }
  return best;
}

}  // namespace

TEST_CASE("constant response gives a single leaf") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(20, 3);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 4.5);
  const auto tree = fit_tree(X, y, all_features(3));
  CHECK(tree.n_leaves() == 1);
  CHECK(tree.predict(X).isApprox(y));
  CHECK(tree.leaf_index(X, 7) == 0);
  const auto D = tree.design_matrix(X.topRows(4));
  CHECK(Eigen::MatrixXd(D) == Eigen::MatrixXd::Ones(4, 1));
}

TEST_CASE("step function splits once on x1") {
  const auto s = step_data();
  int feature = -1;
  double cut = 0;
  CHECK(best_split_sse(s.X, s.y, feature, cut) == doctest::Approx(0.0));
  CHECK(feature == 0);

  const auto tree = fit_tree(s.X, s.y, all_features(2));
  REQUIRE(tree.n_leaves() == 2);
  const auto& root = tree.nodes().front();
  CHECK(root.feature == 0);
  CHECK(root.threshold == 0.0);
  const Eigen::Vector2d values = tree.leaf_values();
  CHECK(values[0] == 0.0);
  CHECK(values[1] == 1.0);

  const std::vector<double> far_left{-5.0, 0.3};
  CHECK(tree.leaf_index(far_left) == 0);
  const std::vector<double> boundary{0.0, 0.3};
  CHECK(tree.leaf_index(boundary) == 0);

  // column sums of the design equal leaf occupancy
  const Eigen::MatrixXd D = tree.design_matrix(s.X);
  CHECK(D.col(0).sum() == 5.0);
  CHECK(D.col(1).sum() == 5.0);
}

TEST_CASE("tree invariants on random data") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  const int n = 60;
  Eigen::MatrixXd X(n, 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < 4; ++f) X(i, f) = z(rng);
    y[i] = X(i, 0) > 0 ? 2.0 : -1.0;
    y[i] += X(i, 1) + 0.3 * z(rng);
  }
  const auto tree = fit_tree(X, y, all_features(4));
  const Eigen::MatrixXd D = tree.design_matrix(X);
  const Eigen::VectorXd values = tree.leaf_values();

  // one-hot rows
  CHECK((D.rowwise().sum().array() == 1.0).all());
  // predictions are the design times leaf values
  CHECK((tree.predict(X) - D * values).cwiseAbs().maxCoeff() < 1e-12);
  // leaf values are the per-leaf training means
  for (Eigen::Index l = 0; l < D.cols(); ++l) {
    const double count = D.col(l).sum();
    CHECK(count >= 5.0);
    CHECK(values[l] == doctest::Approx(D.col(l).dot(y) / count).epsilon(1e-12));
  }
  // mass conservation
  CHECK((D.colwise().sum() * values)(0) == doctest::Approx(y.sum()).epsilon(1e-12));
  // root split is the brute-force SSE-optimal one
  int feature = -1;
  double cut = 0;
  best_split_sse(X, y, feature, cut);
  CHECK(tree.nodes().front().feature == feature);

  // determinism with a fixed seed
  const auto again = fit_tree(X, y, all_features(4));
  CHECK(again.predict(X) == tree.predict(X));
}

TEST_CASE("deep tree interpolates distinct rows") {
  Eigen::MatrixXd X(6, 2);
  X << 0, 1, 1, 3, 2, 0, 3, 5, 4, 2, 5, 4;
  Eigen::VectorXd y(6);
  y << 3, -1, 4, 1, -5, 9;
  const auto tree = fit_tree(X, y, all_features(2, 1));
  CHECK(tree.n_leaves() == 6);
  CHECK((tree.predict(X) - y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("tree errors") {
  Eigen::MatrixXd X(0, 2);
  Eigen::VectorXd y(0);
  CHECK_THROWS_AS(fit_tree(X, y, TreeConfig{}), Error);
  const auto s = step_data();
  const auto tree = fit_tree(s.X, s.y, all_features(2));
  CHECK_THROWS_AS(tree.predict(Eigen::MatrixXd::Zero(2, 3)), Error);
  CHECK(default_mtry(20) == 7);
  CHECK(default_mtry(1) == 1);
}

TEST_CASE("from_nodes round trip") {
  const auto s = step_data();
  const auto tree = fit_tree(s.X, s.y, all_features(2));
  const auto copy = RegressionTree::from_nodes(tree.nodes(), tree.n_features());
  CHECK(copy.predict(s.X) == tree.predict(s.X));
  auto broken = tree.nodes();
  broken.front().left = 99;
  CHECK_THROWS_AS(RegressionTree::from_nodes(broken, 2), Error);
}

#include "treeging/kriging.hpp"

#include <algorithm>
#include <cmath>

#include <limits>
#include <numeric>

#include "treeging/errors.hpp"
#include "treeging/neighbors.hpp"

namespace treeging {

namespace {

// Smallest acceptable pivot relative to the largest diagonal entry.
constexpr double kPivotFloor = 1e-12;

// Lower triangle (diagonal included) in compressed column form.
struct LowerTriangle {
  Eigen::Index n = 0;
  std::vector<int> outer;
  std::vector<int> inner;
  std::vector<double> values;

  double density() const {
    const double nnz = 2.0 * static_cast<double>(values.size()) - static_cast<double>(n);
    return nnz / (static_cast<double>(n) * static_cast<double>(n));
  }
};

// Lag radii outside which the model's covariance is exactly zero.
std::pair<double, double> support(const CovarianceModel& model) {
  if (model.kind == CovarianceKind::spatial) return {model.spatial.range, std::numeric_limits<double>::infinity()};
  return {model.spatial.range, model.temporal->range};
}

LowerTriangle lower_triangle(const CovarianceModel& model, std::span<const Coordinate> coords) {
  LowerTriangle lt;
  lt.n = static_cast<Eigen::Index>(coords.size());
  lt.outer.reserve(coords.size() + 1);
  lt.outer.push_back(0);
  const double var = model.variance();
  const bool independent = model.is_independent();
  const NeighborIndex index(coords);
  const auto [rs, rt] = support(model);
  std::vector<std::size_t> rows;
  for (std::size_t j = 0; j < coords.size(); ++j) {
    lt.inner.push_back(static_cast<int>(j));
    lt.values.push_back(var);
    if (!independent) {
      rows.clear();
      index.query(coords[j], rs, rt, [&](std::size_t i, double, double) {
        if (i > j) rows.push_back(i);
      });
      std::sort(rows.begin(), rows.end());
      for (auto i : rows) {
        const double c = model.between(coords[i], coords[j]);
        if (c != 0.0) {
          lt.inner.push_back(static_cast<int>(i));
          lt.values.push_back(c);
        }
      }
    }
    lt.outer.push_back(static_cast<int>(lt.values.size()));
  }
  return lt;
}

// Largest |p(i) - p(j)| over the stored entries under the ordering `order`
// (order[new] = old).
Eigen::Index bandwidth(const LowerTriangle& lt, const std::vector<int>& order) {
  std::vector<int> pos(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) pos[static_cast<std::size_t>(order[k])] = static_cast<int>(k);
  int kd = 0;
  for (Eigen::Index j = 0; j < lt.n; ++j)
    for (int k = lt.outer[static_cast<std::size_t>(j)]; k < lt.outer[static_cast<std::size_t>(j) + 1]; ++k)
      kd = std::max(kd, std::abs(pos[static_cast<std::size_t>(lt.inner[static_cast<std::size_t>(k)])] -
                                 pos[static_cast<std::size_t>(j)]));
  return kd;
}

// Reverse Cuthill-McKee ordering of the sparsity graph.
std::vector<int> reverse_cuthill_mckee(const LowerTriangle& lt) {
  const auto n = static_cast<std::size_t>(lt.n);
  std::vector<std::vector<int>> adj(n);
  for (std::size_t j = 0; j < n; ++j)
    for (int k = lt.outer[j]; k < lt.outer[j + 1]; ++k) {
      const auto i = static_cast<std::size_t>(lt.inner[static_cast<std::size_t>(k)]);
      if (i == j) continue;
      adj[i].push_back(static_cast<int>(j));
      adj[j].push_back(static_cast<int>(i));
    }
  const auto degree = [&](int v) { return adj[static_cast<std::size_t>(v)].size(); };
  for (auto& a : adj)
    std::stable_sort(a.begin(), a.end(), [&](int x, int y) { return degree(x) < degree(y); });

  std::vector<int> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  std::vector<int> level(n, 0);
  const auto bfs = [&](int start, std::vector<int>& out) {
    out.clear();
    std::vector<char> mark(seen);
    mark[static_cast<std::size_t>(start)] = 1;
    out.push_back(start);
    for (std::size_t head = 0; head < out.size(); ++head)
      for (int w : adj[static_cast<std::size_t>(out[head])])
        if (!mark[static_cast<std::size_t>(w)]) {
          mark[static_cast<std::size_t>(w)] = 1;
          out.push_back(w);
        }
  };
  std::vector<int> comp;
  for (std::size_t v = 0; v < n; ++v) {
    if (seen[v]) continue;
    // lowest-degree vertex of the component, then the lowest-degree vertex
    // of the last BFS level from it
    bfs(static_cast<int>(v), comp);
    int start = *std::min_element(comp.begin(), comp.end(), [&](int a, int b) {
      return degree(a) != degree(b) ? degree(a) < degree(b) : a < b;
    });
    bfs(start, comp);
    start = comp.back();
    bfs(start, comp);
    for (int w : comp) seen[static_cast<std::size_t>(w)] = 1;
    order.insert(order.end(), comp.begin(), comp.end());
  }
  std::reverse(order.begin(), order.end());
  return order;
}

std::vector<int> sorted_order(std::span<const Coordinate> coords, bool time_first) {
  std::vector<int> order(coords.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& p = coords[static_cast<std::size_t>(a)];
    const auto& q = coords[static_cast<std::size_t>(b)];
    const double pt = p.t.value_or(0.0), qt = q.t.value_or(0.0);
    if (time_first && pt != qt) return pt < qt;
    if (p.s1 != q.s1) return p.s1 < q.s1;
    if (p.s2 != q.s2) return p.s2 < q.s2;
    return pt < qt;
  });
  return order;
}

// Cholesky factor of a symmetric banded matrix held as dense B x B blocks:
// block (k, d) couples block row k + d with block column k, d = 0..p.
class BandCholesky {
 public:
  BandCholesky(const LowerTriangle& lt, std::vector<int> order, Eigen::Index kd) : order_(std::move(order)) {
    n_ = lt.n;
    block_ = std::clamp<Eigen::Index>((kd + 3) / 4, 32, 192);
    n_blocks_ = n_ == 0 ? 0 : (n_ + block_ - 1) / block_;
    pos_.resize(order_.size());
    for (std::size_t k = 0; k < order_.size(); ++k) pos_[static_cast<std::size_t>(order_[k])] = static_cast<int>(k);
    p_ = 0;
    for (Eigen::Index j = 0; j < n_; ++j)
      for (int k = lt.outer[static_cast<std::size_t>(j)]; k < lt.outer[static_cast<std::size_t>(j) + 1]; ++k) {
        const auto [r, c] = place(lt.inner[static_cast<std::size_t>(k)], static_cast<int>(j));
        p_ = std::max(p_, r / block_ - c / block_);
      }
    blocks_.resize(static_cast<std::size_t>(n_blocks_ * (p_ + 1)));
    for (Eigen::Index k = 0; k < n_blocks_; ++k)
      for (Eigen::Index d = 0; d <= p_ && k + d < n_blocks_; ++d) block(k, d).setZero(size(k + d), size(k));
    for (Eigen::Index j = 0; j < n_; ++j)
      for (int k = lt.outer[static_cast<std::size_t>(j)]; k < lt.outer[static_cast<std::size_t>(j) + 1]; ++k) {
        const auto [r, c] = place(lt.inner[static_cast<std::size_t>(k)], static_cast<int>(j));
        block(c / block_, r / block_ - c / block_)(r % block_, c % block_) = lt.values[static_cast<std::size_t>(k)];
      }
  }

  // Factorizes in place; false when a pivot falls to or below `floor`.
  bool factorize(double floor) {
    for (Eigen::Index k = 0; k < n_blocks_; ++k) {
      for (Eigen::Index d = 0; d <= p_ && k + d < n_blocks_; ++d) {
        const Eigen::Index i = k + d;
        Eigen::MatrixXd& s = block(k, d);
        for (Eigen::Index m = std::max<Eigen::Index>(0, i - p_); m < k; ++m)
          s.noalias() -= block(m, i - m) * block(m, k - m).transpose();
        if (d == 0) {
          Eigen::LLT<Eigen::MatrixXd> llt(s);
          if (llt.info() != Eigen::Success) return false;
          s = llt.matrixL();
          if (s.diagonal().array().square().minCoeff() <= floor) return false;
        } else {
          block(k, 0).triangularView<Eigen::Lower>().transpose().solveInPlace<Eigen::OnTheRight>(s);
        }
      }
    }
    return true;
  }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    Eigen::MatrixXd x(rhs.rows(), rhs.cols());
    for (Eigen::Index i = 0; i < n_; ++i) x.row(i) = rhs.row(order_[static_cast<std::size_t>(i)]);
    for (Eigen::Index k = 0; k < n_blocks_; ++k) {
      auto xk = x.middleRows(k * block_, size(k));
      for (Eigen::Index d = 1; d <= p_ && d <= k; ++d)
        xk.noalias() -= block(k - d, d) * x.middleRows((k - d) * block_, size(k - d));
      block(k, 0).triangularView<Eigen::Lower>().solveInPlace(xk);
    }
    for (Eigen::Index k = n_blocks_ - 1; k >= 0; --k) {
      auto xk = x.middleRows(k * block_, size(k));
      for (Eigen::Index d = 1; d <= p_ && k + d < n_blocks_; ++d)
        xk.noalias() -= block(k, d).transpose() * x.middleRows((k + d) * block_, size(k + d));
      block(k, 0).triangularView<Eigen::Lower>().transpose().solveInPlace(xk);
    }
    Eigen::MatrixXd out(rhs.rows(), rhs.cols());
    for (Eigen::Index i = 0; i < n_; ++i) out.row(order_[static_cast<std::size_t>(i)]) = x.row(i);
    return out;
  }

 private:
  // Permuted (row, col) with row >= col.
  std::pair<Eigen::Index, Eigen::Index> place(int i, int j) const {
    const Eigen::Index a = pos_[static_cast<std::size_t>(i)], b = pos_[static_cast<std::size_t>(j)];
    return {std::max(a, b), std::min(a, b)};
  }
  Eigen::Index size(Eigen::Index k) const { return std::min(block_, n_ - k * block_); }
  Eigen::MatrixXd& block(Eigen::Index k, Eigen::Index d) { return blocks_[static_cast<std::size_t>(k * (p_ + 1) + d)]; }
  const Eigen::MatrixXd& block(Eigen::Index k, Eigen::Index d) const {
    return blocks_[static_cast<std::size_t>(k * (p_ + 1) + d)];
  }

  Eigen::Index n_ = 0;
  Eigen::Index block_ = 32;
  Eigen::Index n_blocks_ = 0;
  Eigen::Index p_ = 0;
  std::vector<int> order_;
  std::vector<int> pos_;
  std::vector<Eigen::MatrixXd> blocks_;
};

}  // namespace

struct CovarianceSolver::Impl {
  Eigen::Index n = 0;
  double density = 1.0;
  double jitter = 0.0;
  std::optional<Eigen::LLT<Eigen::MatrixXd>> dense;
  std::unique_ptr<BandCholesky> band;

  void factorize_dense(Eigen::MatrixXd sigma) {
    n = sigma.rows();
    const double scale = n > 0 ? sigma.diagonal().maxCoeff() : 1.0;
    for (std::size_t level = 0; level <= std::size(kJitterLevels); ++level) {
      const double eps = level == 0 ? 0.0 : kJitterLevels[level - 1];
      if (level > 0)
        sigma.diagonal().array() += (eps - (level > 1 ? kJitterLevels[level - 2] : 0.0)) * scale;
      Eigen::LLT<Eigen::MatrixXd> llt(sigma);
      if (llt.info() == Eigen::Success) {
        const auto d = llt.matrixLLT().diagonal();
        if (n == 0 || d.minCoeff() * d.minCoeff() > kPivotFloor * scale) {
          dense = std::move(llt);
          jitter = eps;
          return;
        }
      }
    }
    fail(ErrorKind::ill_conditioned, "covariance matrix is not positive definite after maximum jitter");
  }

  // Compressed storage: the fill-reducing ordering with the smallest
  // bandwidth among reverse Cuthill-McKee and coordinate sorts, then a
  // blocked band Cholesky.
  void factorize_sparse(LowerTriangle lt, std::span<const Coordinate> coords, double scale) {
    n = lt.n;
    std::vector<std::vector<int>> candidates;
    candidates.push_back(reverse_cuthill_mckee(lt));
    candidates.push_back(sorted_order(coords, false));
    if (!coords.empty() && coords.front().has_time()) candidates.push_back(sorted_order(coords, true));
    std::size_t best = 0;
    Eigen::Index best_kd = bandwidth(lt, candidates[0]);
    for (std::size_t c = 1; c < candidates.size(); ++c)
      if (const auto kd = bandwidth(lt, candidates[c]); kd < best_kd) {
        best = c;
        best_kd = kd;
      }
    for (std::size_t level = 0; level <= std::size(kJitterLevels); ++level) {
      const double eps = level == 0 ? 0.0 : kJitterLevels[level - 1];
      if (level > 0) {
        const double step = (eps - (level > 1 ? kJitterLevels[level - 2] : 0.0)) * scale;
        for (Eigen::Index j = 0; j < n; ++j) lt.values[static_cast<std::size_t>(lt.outer[static_cast<std::size_t>(j)])] += step;
      }
      auto chol = std::make_unique<BandCholesky>(lt, candidates[best], best_kd);
      if (chol->factorize(kPivotFloor * scale)) {
        band = std::move(chol);
        jitter = eps;
        return;
      }
    }
    fail(ErrorKind::ill_conditioned, "covariance matrix is not positive definite after maximum jitter");
  }
};

CovarianceSolver::CovarianceSolver(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
CovarianceSolver::CovarianceSolver(CovarianceSolver&&) noexcept = default;
CovarianceSolver& CovarianceSolver::operator=(CovarianceSolver&&) noexcept = default;
CovarianceSolver::~CovarianceSolver() = default;

CovarianceSolver CovarianceSolver::factorize(const CovarianceModel& model, std::span<const Coordinate> coords,
                                             SolvePath path) {
  model.validate();
  if (model.kind == CovarianceKind::separable)
    for (const auto& c : coords)
      if (!c.has_time()) fail(ErrorKind::shape, "separable covariance needs space-time coordinates");
  auto impl = std::make_unique<Impl>();
  if (path == SolvePath::dense) {
    impl->factorize_dense(covariance_matrix(model, coords));
    return CovarianceSolver(std::move(impl));
  }
  LowerTriangle lt = lower_triangle(model, coords);
  impl->density = lt.density();
  if (path == SolvePath::sparse || impl->density <= kSparseDensityThreshold) {
    impl->factorize_sparse(std::move(lt), coords, model.variance());
  } else {
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(lt.n, lt.n);
    for (Eigen::Index j = 0; j < lt.n; ++j)
      for (int k = lt.outer[static_cast<std::size_t>(j)]; k < lt.outer[static_cast<std::size_t>(j) + 1]; ++k) {
        const auto i = lt.inner[static_cast<std::size_t>(k)];
        sigma(i, j) = sigma(j, i) = lt.values[static_cast<std::size_t>(k)];
      }
    lt = {};
    const double density = impl->density;
    impl->factorize_dense(std::move(sigma));
    impl->density = density;
  }
  return CovarianceSolver(std::move(impl));
}

CovarianceSolver CovarianceSolver::factorize(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) fail(ErrorKind::shape, "covariance matrix must be square");
  if (!sigma.isApprox(sigma.transpose(), 1e-12) && sigma.size() > 0)
    fail(ErrorKind::validation, "covariance matrix must be symmetric");
  auto impl = std::make_unique<Impl>();
  const double nnz = static_cast<double>((sigma.array() != 0.0).count());
  impl->factorize_dense(sigma);
  impl->density = sigma.size() ? nnz / static_cast<double>(sigma.size()) : 1.0;
  return CovarianceSolver(std::move(impl));
}

Eigen::MatrixXd CovarianceSolver::solve(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != impl_->n) fail(ErrorKind::shape, "right-hand side does not match covariance size");
  if (impl_->dense) return impl_->dense->solve(rhs);
  return impl_->band->solve(rhs);
}

Eigen::VectorXd CovarianceSolver::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != impl_->n) fail(ErrorKind::shape, "right-hand side does not match covariance size");
  if (impl_->dense) return impl_->dense->solve(rhs);
  return impl_->band->solve(Eigen::MatrixXd(rhs)).col(0);
}

Eigen::Index CovarianceSolver::size() const noexcept { return impl_->n; }
bool CovarianceSolver::is_sparse() const noexcept { return impl_->band != nullptr; }
double CovarianceSolver::density() const noexcept { return impl_->density; }
double CovarianceSolver::jitter() const noexcept { return impl_->jitter; }

Eigen::VectorXd gls_beta(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const CovarianceSolver& sigma) {
  if (X.rows() != y.size() || X.rows() != sigma.size())
    fail(ErrorKind::shape, "GLS inputs differ in row count");
  if (X.cols() == 0) fail(ErrorKind::shape, "GLS design has no columns");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) fail(ErrorKind::singular_design, "design matrix is rank deficient");
  const Eigen::MatrixXd si_x = sigma.solve(X);
  const Eigen::VectorXd si_y = sigma.solve(y);
  const Eigen::MatrixXd gram = X.transpose() * si_x;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
    fail(ErrorKind::singular_design, "GLS normal matrix is singular");
  return ldlt.solve(X.transpose() * si_y);
}

Eigen::VectorXd gls_beta(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::MatrixXd& sigma) {
  return gls_beta(X, y, CovarianceSolver::factorize(sigma));
}

Eigen::VectorXd DependenceTerm::evaluate(std::span<const Coordinate> targets) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(targets.size()));
  if (vanishes()) return out;
  if (cov.kind == CovarianceKind::separable)
    for (const auto& c : targets)
      if (!c.has_time()) fail(ErrorKind::shape, "separable covariance needs space-time coordinates");
  const NeighborIndex index(coords);
  const auto [rs, rt] = support(cov);
  std::vector<std::size_t> near;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    near.clear();
    index.query(targets[i], rs, rt, [&](std::size_t j, double, double) { near.push_back(j); });
    std::sort(near.begin(), near.end());
    double acc = 0.0;
    for (auto j : near) {
      const double c = cov.between(targets[i], coords[j]);
      if (c != 0.0) acc += c * weights[static_cast<Eigen::Index>(j)];
    }
    out[static_cast<Eigen::Index>(i)] = acc;
  }
  return out;
}

DependenceTerm make_dependence(CovarianceModel cov, std::vector<Coordinate> coords,
                               const Eigen::VectorXd& residuals, const CovarianceSolver& solver) {
  if (residuals.size() != static_cast<Eigen::Index>(coords.size()))
    fail(ErrorKind::shape, "residual count does not match coordinates");
  DependenceTerm d{std::move(cov), std::move(coords), {}};
  if (!d.cov.is_independent()) d.weights = solver.solve(residuals);
  return d;
}

DependenceTerm fit_dependence(CovarianceModel cov, std::vector<Coordinate> coords,
                              const Eigen::VectorXd& residuals, SolvePath path) {
  if (residuals.size() != static_cast<Eigen::Index>(coords.size()))
    fail(ErrorKind::shape, "residual count does not match coordinates");
  if (cov.is_independent()) return {std::move(cov), std::move(coords), {}};
  const auto solver = CovarianceSolver::factorize(cov, coords, path);
  return make_dependence(std::move(cov), std::move(coords), residuals, solver);
}

std::size_t LinearDesign::n_full_columns() const noexcept {
  std::size_t k = 1;
  if (use_coordinates) k += spacetime ? 3 : 2;
  if (use_covariates) k += n_covariates;
  return k;
}

Eigen::MatrixXd LinearDesign::full(const Dataset& data) const {
  if (data.n_covariates() != n_covariates)
    fail(ErrorKind::shape, "expected " + std::to_string(n_covariates) + " covariates, got " +
                               std::to_string(data.n_covariates()));
  if (use_coordinates && data.is_spacetime() != spacetime)
    fail(ErrorKind::shape, "coordinate dimensionality does not match the fitted design");
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd f(n, static_cast<Eigen::Index>(n_full_columns()));
  f.col(0).setOnes();
  Eigen::Index col = 1;
  if (use_coordinates) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& c = data.coords[static_cast<std::size_t>(i)];
      f(i, col) = c.s1;
      f(i, col + 1) = c.s2;
      if (spacetime) f(i, col + 2) = *c.t;
    }
    col += spacetime ? 3 : 2;
  }
  if (use_covariates && n_covariates > 0) f.rightCols(static_cast<Eigen::Index>(n_covariates)) = data.X;
  return f;
}

Eigen::MatrixXd LinearDesign::build(const Dataset& data) const {
  const Eigen::MatrixXd f = full(data);
  Eigen::MatrixXd out(f.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = f.col(static_cast<Eigen::Index>(kept[k]));
  return out;
}

std::vector<std::size_t> independent_columns(const Eigen::MatrixXd& X, double tol) {
  std::vector<std::size_t> kept;
  Eigen::MatrixXd basis(X.rows(), 0);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    Eigen::VectorXd v = X.col(c);
    const double norm = v.norm();
    if (!(norm > 0.0)) continue;
    for (int pass = 0; pass < 2; ++pass)
      if (basis.cols() > 0) v -= basis * (basis.transpose() * v);
    const double rest = v.norm();
    if (rest > tol * norm) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = v / rest;
      kept.push_back(static_cast<std::size_t>(c));
    }
  }
  return kept;
}

Eigen::VectorXd KrigingModel::predict(const Dataset& data) const {
  return krige_predict(*this, data.coords, design.build(data));
}

KrigingModel fit_kriging(const Dataset& data, const KrigingOptions& options) {
  data.validate();
  KrigingModel model;
  model.design.use_coordinates = options.use_coordinates;
  model.design.use_covariates = options.use_covariates;
  model.design.spacetime = data.is_spacetime();
  model.design.n_covariates = data.n_covariates();

  const Eigen::MatrixXd full = model.design.full(data);
  const auto n = static_cast<std::size_t>(full.rows());
  const auto k = static_cast<std::size_t>(full.cols());
  if (n <= k)
    fail(ErrorKind::singular_design, "kriging design has " + std::to_string(k) + " columns but only " +
                                         std::to_string(n) + " rows");
  if (n < k + 2)
    fail(ErrorKind::insufficient_data, "kriging needs at least k + 2 = " + std::to_string(k + 2) + " rows");

  model.design.kept = independent_columns(full);
  if (model.design.kept.size() < k) {
    const auto dropped = k - model.design.kept.size();
    model.warnings.push_back("dropped " + std::to_string(dropped) + " collinear design column(s)");
  }
  const Eigen::MatrixXd X = model.design.build(data);

  const Eigen::VectorXd ols = X.colPivHouseholderQr().solve(data.y);
  const Eigen::VectorXd ols_residuals = data.y - X * ols;
  CovarianceModel cov = options.covariance
                            ? *options.covariance
                            : fit_covariance({ols_residuals.data(), static_cast<std::size_t>(ols_residuals.size())},
                                             data.coords, options.variogram);
  const auto solver = CovarianceSolver::factorize(cov, data.coords, options.path);
  model.sparse_solve = solver.is_sparse();
  model.beta = gls_beta(X, data.y, solver);
  model.residuals = data.y - X * model.beta;
  model.dependence = make_dependence(std::move(cov), data.coords, model.residuals, solver);
  return model;
}

Eigen::VectorXd krige_predict(const KrigingModel& model, std::span<const Coordinate> new_coords,
                              const Eigen::MatrixXd& X_new) {
  if (X_new.cols() != model.beta.size())
    fail(ErrorKind::shape, "design rows have " + std::to_string(X_new.cols()) + " columns, model expects " +
                               std::to_string(model.beta.size()));
  if (X_new.rows() != static_cast<Eigen::Index>(new_coords.size()))
    fail(ErrorKind::shape, "design rows do not match the number of coordinates");
  return X_new * model.beta + model.dependence.evaluate(new_coords);
}

}  // namespace treeging

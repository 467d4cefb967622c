#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treeging/covariance.hpp"
#include "treeging/data.hpp"

namespace treeging {

enum class SolvePath { automatic, dense, sparse };

// Covariance matrices with at most this fraction of nonzeros are factorized
// in compressed sparse storage when the path is automatic.
inline constexpr double kSparseDensityThreshold = 0.40;

// Diagonal jitter levels (times the total sill) tried in order after a plain
// factorization fails.
inline constexpr double kJitterLevels[] = {1e-8, 1e-6, 1e-4};

// Symmetric positive-definite factorization of a covariance matrix, dense
// (LLT) or sparse (blocked band Cholesky under a bandwidth-reducing ordering).
// Move-only.
class CovarianceSolver {
 public:
  // Builds and factorizes the training covariance of `coords` under `model`.
  static CovarianceSolver factorize(const CovarianceModel& model, std::span<const Coordinate> coords,
                                    SolvePath path = SolvePath::automatic);
  // Factorizes an explicit dense covariance matrix.
  static CovarianceSolver factorize(const Eigen::MatrixXd& sigma);

  CovarianceSolver(CovarianceSolver&&) noexcept;
  CovarianceSolver& operator=(CovarianceSolver&&) noexcept;
  ~CovarianceSolver();

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  Eigen::Index size() const noexcept;
  bool is_sparse() const noexcept;
  // Fraction of nonzero entries in the covariance matrix.
  double density() const noexcept;
  // Jitter multiplier that was needed (0 when none).
  double jitter() const noexcept;

 private:
  struct Impl;
  explicit CovarianceSolver(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// GLS coefficients [X' S^-1 X]^-1 X' S^-1 y via a factorization of S.
Eigen::VectorXd gls_beta(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const CovarianceSolver& sigma);
Eigen::VectorXd gls_beta(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::MatrixXd& sigma);

// The BLUP dependence correction Sigma_0 Sigma^-1 e, with Sigma^-1 e cached.
struct DependenceTerm {
  CovarianceModel cov;
  std::vector<Coordinate> coords;
  Eigen::VectorXd weights;  // Sigma^-1 e; empty when cov is independent

  bool vanishes() const noexcept { return weights.size() == 0; }
  Eigen::VectorXd evaluate(std::span<const Coordinate> targets) const;
};

DependenceTerm make_dependence(CovarianceModel cov, std::vector<Coordinate> coords,
                               const Eigen::VectorXd& residuals, const CovarianceSolver& solver);
DependenceTerm fit_dependence(CovarianceModel cov, std::vector<Coordinate> coords,
                              const Eigen::VectorXd& residuals, SolvePath path = SolvePath::automatic);

// Intercept + coordinates + covariates, with the columns kept after the
// collinearity policy.
struct LinearDesign {
  bool use_coordinates = true;
  bool use_covariates = true;
  bool spacetime = false;
  std::size_t n_covariates = 0;
  std::vector<std::size_t> kept;  // indices into full() columns

  std::size_t n_full_columns() const noexcept;
  Eigen::MatrixXd full(const Dataset& data) const;
  Eigen::MatrixXd build(const Dataset& data) const;
};

// Indices of a maximal set of linearly independent columns, chosen left to
// right (so collinear columns are dropped right to left).
std::vector<std::size_t> independent_columns(const Eigen::MatrixXd& X, double tol = 1e-9);

struct KrigingOptions {
  bool use_coordinates = true;
  bool use_covariates = true;
  SolvePath path = SolvePath::automatic;
  VariogramOptions variogram;
  // Skip estimation and use this covariance model.
  std::optional<CovarianceModel> covariance;
};

struct KrigingModel {
  LinearDesign design;
  Eigen::VectorXd beta;
  DependenceTerm dependence;
  Eigen::VectorXd residuals;  // y - X beta at the training rows
  bool sparse_solve = false;
  std::vector<std::string> warnings;

  Eigen::VectorXd predict(const Dataset& data) const;
};

// One-pass universal kriging: OLS -> residual variogram -> spherical fit ->
// GLS refit -> cached Sigma^-1 (y - X beta).
KrigingModel fit_kriging(const Dataset& data, const KrigingOptions& options = {});

// X_new holds design rows (the model's kept columns).
Eigen::VectorXd krige_predict(const KrigingModel& model, std::span<const Coordinate> new_coords,
                              const Eigen::MatrixXd& X_new);

}  // namespace treeging

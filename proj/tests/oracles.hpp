#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "treeging/data.hpp"

namespace oracle {

inline double spherical_between(double h, double a, double s, double r) {
  if (h > r) return 0.0;
  const double u = h / r;
  return (s - a) * (1.0 - 1.5 * u + 0.5 * u * u * u);
}

// Spatial spherical covariance with the nugget on the diagonal only.
inline Eigen::MatrixXd spatial_cov(const std::vector<treeging::Coordinate>& a,
                                   const std::vector<treeging::Coordinate>& b, double nugget, double sill,
                                   double range, bool same_set) {
  Eigen::MatrixXd S(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double h = std::sqrt((a[i].s1 - b[j].s1) * (a[i].s1 - b[j].s1) + (a[i].s2 - b[j].s2) * (a[i].s2 - b[j].s2));
      S(i, j) = same_set && i == j ? sill : spherical_between(h, nugget, sill, range);
    }
  return S;
}

// Universal kriging prediction with explicit inverses.
inline Eigen::VectorXd brute_krige(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::MatrixXd& S,
                                   const Eigen::MatrixXd& X0, const Eigen::MatrixXd& S0) {
  const Eigen::MatrixXd Si = S.inverse();
  const Eigen::VectorXd beta = (X.transpose() * Si * X).inverse() * X.transpose() * Si * y;
  return X0 * beta + S0 * Si * (y - X * beta);
}

inline Eigen::MatrixXd linear_design(const treeging::Dataset& d) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(d.size()), 3 + d.X.cols());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    X(r, 0) = 1.0;
    X(r, 1) = d.coords[i].s1;
    X(r, 2) = d.coords[i].s2;
    for (Eigen::Index c = 0; c < d.X.cols(); ++c) X(r, 3 + c) = d.X(r, c);
  }
  return X;
}

}  // namespace oracle

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treeging/data.hpp"

namespace treeging {

// Spherical model parameters: nugget a, sill s, range r with 0 <= a <= s, r > 0.
struct SphericalParams {
  double nugget = 0.0;
  double sill = 1.0;
  double range = 1.0;

  void validate() const;
  double partial_sill() const noexcept { return sill - nugget; }
};

// gamma(h) = 0 at h = 0, a + (s - a)(3h/2r - h^3/2r^3) on (0, r], s beyond r.
double spherical_variogram(double h, const SphericalParams& p);

// C(h) = s at h = 0, (s - a)(1 - 3h/2r + h^3/2r^3) on (0, r], 0 beyond r.
double spherical_covariance(double h, const SphericalParams& p);

// Covariance between two distinct observations at lag h: the h -> 0+ limit
// (s - a) is used at h = 0, so the nugget only ever sits on the diagonal.
double spherical_covariance_between(double h, const SphericalParams& p);

struct EmpiricalVariogram {
  std::vector<double> bin_centers;
  std::vector<double> semivariances;
  std::vector<std::size_t> pair_counts;
  double bin_half_width = 0.0;
  double max_dist = 0.0;
  // Sample variance of the residuals the variogram was built from, if known.
  std::optional<double> residual_variance;

  std::size_t n_bins() const noexcept { return bin_centers.size(); }
};

enum class LagAxis { spatial, temporal };

// Bins pairs into n_bins equal-width bins on (0, max_dist]. Each bin holds
// half the mean squared residual difference of its pairs.
EmpiricalVariogram empirical_variogram(std::span<const double> residuals,
                                       std::span<const DistancePair> pairs, std::size_t n_bins,
                                       double max_dist, LagAxis axis = LagAxis::spatial);

// Pair-count-weighted least-squares spherical fit. See covariance.cpp for the
// search; the result is deterministic for a given variogram.
SphericalParams fit_spherical(const EmpiricalVariogram& vario);

// Weighted squared error of params against the variogram's nonempty bins.
double spherical_fit_objective(const EmpiricalVariogram& vario, const SphericalParams& p);

enum class CovarianceKind { spatial, separable };

// Spatial spherical covariance, or a separable space-time product.
//
// The separable product is C_s(h_s) * C_t(h_t) / s_t when normalize_temporal is
// set (total sill = s_spatial), or the plain product otherwise.
struct CovarianceModel {
  CovarianceKind kind = CovarianceKind::spatial;
  SphericalParams spatial;
  std::optional<SphericalParams> temporal;
  bool normalize_temporal = true;

  static CovarianceModel make_spatial(SphericalParams p);
  static CovarianceModel make_separable(SphericalParams spatial, SphericalParams temporal,
                                        bool normalize_temporal = true);
  // Independence: C = s on the diagonal and 0 between any two observations.
  static CovarianceModel pure_nugget(double sill);

  void validate() const;
  double total_sill() const;
  // True when every off-diagonal covariance vanishes.
  bool is_independent() const;

  // Covariance between two distinct observations.
  double between(const Coordinate& a, const Coordinate& b) const;
  // Covariance of an observation with itself.
  double variance() const { return total_sill(); }

  std::string describe() const;
};

// Training covariance: diagonal = total sill, off-diagonal = between().
Eigen::MatrixXd covariance_matrix(const CovarianceModel& model, std::span<const Coordinate> coords);

// Cross covariance between two coordinate sets (prediction targets vs training
// observations): every entry is between(), so lag 0 gives s - a.
Eigen::MatrixXd covariance_matrix(const CovarianceModel& model, std::span<const Coordinate> coords_a,
                                  std::span<const Coordinate> coords_b);

struct VariogramOptions {
  std::size_t n_bins = 15;
  // max_dist = max_dist_fraction * maximum pairwise lag
  double max_dist_fraction = 0.5;
  bool normalize_temporal = true;
  // Minimum pairs required in the h_t = 0 slice before widening it to the
  // smallest temporal bin.
  std::size_t min_slice_pairs = 30;
};

// Fits a spatial (2-D coords) or separable (3-D coords) spherical model to
// residuals. Space-time: spatial parameters from pairs with h_t = 0 (or within
// the first temporal bin), temporal parameters from pairs with h_s within the
// first spatial bin.
CovarianceModel fit_covariance(std::span<const double> residuals,
                               std::span<const Coordinate> coords,
                               const VariogramOptions& options = {});

}  // namespace treeging

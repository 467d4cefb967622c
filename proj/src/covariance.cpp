#include "treeging/covariance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "treeging/errors.hpp"
#include "treeging/neighbors.hpp"

namespace treeging {

void SphericalParams::validate() const {
  if (!(nugget >= 0.0) || !(sill > 0.0) || !(nugget <= sill) || !(range > 0.0) ||
      !std::isfinite(sill) || !std::isfinite(range))
    fail(ErrorKind::domain, "invalid spherical parameters (nugget=" + format_double(nugget) +
                                ", sill=" + format_double(sill) + ", range=" + format_double(range) + ")");
}

namespace {

// Unit spherical shape: 3h/2r - h^3/2r^3 on [0, r], 1 beyond.
double spherical_shape(double h, double r) noexcept {
  if (h >= r) return 1.0;
  const double u = h / r;
  return 1.5 * u - 0.5 * u * u * u;
}

void check_lag(double h) {
  if (!(h >= 0.0)) fail(ErrorKind::domain, "lag distance must be non-negative");
}

}  // namespace

double spherical_variogram(double h, const SphericalParams& p) {
  check_lag(h);
  if (h == 0.0) return 0.0;
  if (h > p.range) return p.sill;
  return p.nugget + (p.sill - p.nugget) * spherical_shape(h, p.range);
}

double spherical_covariance(double h, const SphericalParams& p) {
  check_lag(h);
  if (h == 0.0) return p.sill;
  if (h > p.range) return 0.0;
  return (p.sill - p.nugget) * (1.0 - spherical_shape(h, p.range));
}

double spherical_covariance_between(double h, const SphericalParams& p) {
  check_lag(h);
  if (h > p.range) return 0.0;
  return (p.sill - p.nugget) * (1.0 - spherical_shape(h, p.range));
}

namespace {

class BinAccumulator {
 public:
  BinAccumulator(std::size_t n_bins, double max_dist)
      : n_bins_(n_bins), max_dist_(max_dist), width_(max_dist / static_cast<double>(n_bins)),
        sums_(n_bins, 0.0), counts_(n_bins, 0) {}

  void add(double h, double diff) {
    if (!(h > 0.0) || h > max_dist_) return;
    auto k = static_cast<std::size_t>(std::ceil(h / width_));
    k = std::clamp<std::size_t>(k, 1, n_bins_) - 1;
    sums_[k] += diff * diff;
    ++counts_[k];
  }

  std::size_t total() const {
    std::size_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }

  EmpiricalVariogram finish(std::optional<double> variance) const {
    EmpiricalVariogram v;
    v.bin_half_width = 0.5 * width_;
    v.max_dist = max_dist_;
    v.residual_variance = variance;
    for (std::size_t k = 0; k < n_bins_; ++k) {
      v.bin_centers.push_back((static_cast<double>(k) + 0.5) * width_);
      v.pair_counts.push_back(counts_[k]);
      v.semivariances.push_back(counts_[k] ? sums_[k] / (2.0 * static_cast<double>(counts_[k])) : 0.0);
    }
    return v;
  }

 private:
  std::size_t n_bins_;
  double max_dist_;
  double width_;
  std::vector<double> sums_;
  std::vector<std::size_t> counts_;
};

std::optional<double> sample_variance(std::span<const double> e) {
  if (e.size() < 2) return std::nullopt;
  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= static_cast<double>(e.size());
  double ss = 0.0;
  for (double v : e) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(e.size() - 1);
}

void check_binning(std::size_t n_bins, double max_dist) {
  if (n_bins < 1) fail(ErrorKind::config, "variogram needs at least one bin");
  if (!(max_dist > 0.0) || !std::isfinite(max_dist))
    fail(ErrorKind::empty_variogram, "variogram max distance must be positive");
}

}  // namespace

EmpiricalVariogram empirical_variogram(std::span<const double> residuals,
                                       std::span<const DistancePair> pairs, std::size_t n_bins,
                                       double max_dist, LagAxis axis) {
  check_binning(n_bins, max_dist);
  BinAccumulator acc(n_bins, max_dist);
  for (const auto& p : pairs) {
    if (p.i >= residuals.size() || p.j >= residuals.size())
      fail(ErrorKind::shape, "distance pair index exceeds residual count");
    double h = p.h_spatial;
    if (axis == LagAxis::temporal) {
      if (!p.h_temporal) fail(ErrorKind::shape, "temporal variogram needs temporal lags");
      h = *p.h_temporal;
    }
    acc.add(h, residuals[p.i] - residuals[p.j]);
  }
  if (acc.total() == 0) fail(ErrorKind::empty_variogram, "no pairs fall within (0, max_dist]");
  return acc.finish(sample_variance(residuals));
}

// ---------------------------------------------------------------------------
// Spherical fit.
//
// For a fixed range r the model a + (s - a) g(h; r) is linear in the nugget a
// and the partial sill c = s - a, so those two are solved exactly by a 2x2
// non-negative weighted least squares. The range is searched over a 20-point
// grid on (0, max_dist] and refined by golden section in the bracket around
// the best grid point.

namespace {

struct Bin {
  double h, gamma, w;
};

struct Profile {
  double nugget = 0.0;
  double partial = 0.0;
  double objective = std::numeric_limits<double>::infinity();
};

double objective_of(const std::vector<Bin>& bins, double a, double c, double r) {
  double f = 0.0;
  for (const auto& b : bins) {
    const double d = b.gamma - (a + c * spherical_shape(b.h, r));
    f += b.w * d * d;
  }
  return f;
}

Profile profile_at(const std::vector<Bin>& bins, double r) {
  double sw = 0, sg = 0, sgg = 0, sy = 0, sgy = 0;
  for (const auto& b : bins) {
    const double g = spherical_shape(b.h, r);
    sw += b.w;
    sg += b.w * g;
    sgg += b.w * g * g;
    sy += b.w * b.gamma;
    sgy += b.w * g * b.gamma;
  }
  std::array<std::pair<double, double>, 4> candidates{};
  std::size_t count = 0;
  const double det = sw * sgg - sg * sg;
  if (det > 1e-12 * sw * sgg) {
    const double a = (sgg * sy - sg * sgy) / det;
    const double c = (sw * sgy - sg * sy) / det;
    if (a >= 0.0 && c >= 0.0) candidates[count++] = {a, c};
  }
  if (sgg > 0.0) candidates[count++] = {0.0, std::max(0.0, sgy / sgg)};
  if (sw > 0.0) candidates[count++] = {std::max(0.0, sy / sw), 0.0};
  candidates[count++] = {0.0, 0.0};

  Profile best;
  for (std::size_t k = 0; k < count; ++k) {
    const auto [a, c] = candidates[k];
    const double f = objective_of(bins, a, c, r);
    if (f < best.objective) best = {a, c, f};
  }
  return best;
}

SphericalParams fallback_params(const EmpiricalVariogram& v, double max_dist, double scale) {
  double s = v.residual_variance.value_or(0.0);
  if (!(s > 0.0)) s = scale > 0.0 ? scale : 1.0;
  return {0.0, s, 0.5 * max_dist};
}

}  // namespace

double spherical_fit_objective(const EmpiricalVariogram& vario, const SphericalParams& p) {
  double f = 0.0;
  for (std::size_t k = 0; k < vario.n_bins(); ++k) {
    if (vario.pair_counts[k] == 0) continue;
    const double d = vario.semivariances[k] - spherical_variogram(vario.bin_centers[k], p);
    f += static_cast<double>(vario.pair_counts[k]) * d * d;
  }
  return f;
}

SphericalParams fit_spherical(const EmpiricalVariogram& vario) {
  const std::size_t n = vario.n_bins();
  if (vario.semivariances.size() != n || vario.pair_counts.size() != n)
    fail(ErrorKind::shape, "variogram vectors differ in length");
  if (n < 3) fail(ErrorKind::degenerate_variogram, "spherical fit needs at least 3 bins");

  std::vector<Bin> bins;
  double max_gamma = 0.0, sw = 0.0, swg = 0.0, max_center = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    max_center = std::max(max_center, vario.bin_centers[k]);
    if (vario.pair_counts[k] == 0) continue;
    const auto w = static_cast<double>(vario.pair_counts[k]);
    bins.push_back({vario.bin_centers[k], vario.semivariances[k], w});
    max_gamma = std::max(max_gamma, vario.semivariances[k]);
    sw += w;
    swg += w * vario.semivariances[k];
  }
  const double max_dist =
      vario.max_dist > 0.0 ? vario.max_dist : max_center + vario.bin_half_width;
  if (!(max_dist > 0.0)) fail(ErrorKind::degenerate_variogram, "variogram has no positive lags");
  const double scale = sw > 0.0 ? swg / sw : 0.0;
  if (bins.empty() || !(max_gamma > 0.0)) return fallback_params(vario, max_dist, scale);

  const double s_max = 10.0 * std::max(max_gamma, vario.residual_variance.value_or(0.0));
  const double r_min = 1e-6 * max_dist;
  const double r_max = 2.0 * max_dist;

  constexpr int kGrid = 20;
  std::array<double, kGrid + 2> r_grid{};
  r_grid[0] = r_min;
  for (int k = 1; k <= kGrid; ++k) r_grid[static_cast<std::size_t>(k)] = max_dist * k / kGrid;
  r_grid[kGrid + 1] = r_max;

  int best_k = 1;
  Profile best = profile_at(bins, r_grid[1]);
  double best_r = r_grid[1];
  for (int k = 2; k <= kGrid; ++k) {
    const auto p = profile_at(bins, r_grid[static_cast<std::size_t>(k)]);
    if (p.objective < best.objective) {
      best = p;
      best_k = k;
      best_r = r_grid[static_cast<std::size_t>(k)];
    }
  }

  // Golden-section refinement of r on the neighbouring grid bracket.
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = r_grid[static_cast<std::size_t>(best_k - 1)];
  double hi = r_grid[static_cast<std::size_t>(best_k + 1)];
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  Profile p1 = profile_at(bins, x1), p2 = profile_at(bins, x2);
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-10 * max_dist; ++iter) {
    if (p1.objective <= p2.objective) {
      hi = x2;
      x2 = x1;
      p2 = p1;
      x1 = hi - kInvPhi * (hi - lo);
      p1 = profile_at(bins, x1);
    } else {
      lo = x1;
      x1 = x2;
      p1 = p2;
      x2 = lo + kInvPhi * (hi - lo);
      p2 = profile_at(bins, x2);
    }
    if (p1.objective < best.objective) { best = p1; best_r = x1; }
    if (p2.objective < best.objective) { best = p2; best_r = x2; }
  }

  double a = best.nugget, c = best.partial;
  if (!(a + c > 0.0)) return fallback_params(vario, max_dist, scale);
  if (a + c > s_max) {
    const double shrink = s_max / (a + c);
    a *= shrink;
    c *= shrink;
  }
  return {a, a + c, best_r};
}

// ---------------------------------------------------------------------------

CovarianceModel CovarianceModel::make_spatial(SphericalParams p) {
  p.validate();
  return {CovarianceKind::spatial, p, std::nullopt, true};
}

CovarianceModel CovarianceModel::make_separable(SphericalParams spatial, SphericalParams temporal,
                                                bool normalize_temporal) {
  spatial.validate();
  temporal.validate();
  return {CovarianceKind::separable, spatial, temporal, normalize_temporal};
}

CovarianceModel CovarianceModel::pure_nugget(double sill) {
  if (!(sill > 0.0) || !std::isfinite(sill)) sill = 1.0;
  return make_spatial({sill, sill, 1.0});
}

void CovarianceModel::validate() const {
  spatial.validate();
  if ((kind == CovarianceKind::separable) != temporal.has_value())
    fail(ErrorKind::validation, "temporal parameters must be present iff the model is separable");
  if (temporal) temporal->validate();
}

double CovarianceModel::total_sill() const {
  if (kind == CovarianceKind::spatial) return spatial.sill;
  return normalize_temporal ? spatial.sill : spatial.sill * temporal->sill;
}

bool CovarianceModel::is_independent() const {
  if (spatial.partial_sill() > 0.0) return false;
  return kind == CovarianceKind::spatial || !(temporal->partial_sill() > 0.0);
}

double CovarianceModel::between(const Coordinate& a, const Coordinate& b) const {
  const double hs = spatial_distance(a, b);
  if (kind == CovarianceKind::spatial) return spherical_covariance_between(hs, spatial);
  if (hs > spatial.range) return 0.0;
  const double ht = temporal_distance(a, b);
  if (ht > temporal->range) return 0.0;
  const double norm = normalize_temporal ? temporal->sill : 1.0;
  if (hs == 0.0 && ht == 0.0)
    return spatial.partial_sill() * temporal->partial_sill() / norm;
  return spherical_covariance(hs, spatial) * spherical_covariance(ht, *temporal) / norm;
}

std::string CovarianceModel::describe() const {
  std::ostringstream os;
  auto put = [&](const SphericalParams& p) {
    os << "nugget=" << format_double(p.nugget) << " sill=" << format_double(p.sill)
       << " range=" << format_double(p.range);
  };
  if (kind == CovarianceKind::spatial) {
    os << "spherical(";
    put(spatial);
  } else {
    os << "separable(space: ";
    put(spatial);
    os << "; time: ";
    put(*temporal);
  }
  os << ")";
  return os.str();
}

namespace {

void check_dimensions(const CovarianceModel& model, std::span<const Coordinate> coords) {
  if (model.kind == CovarianceKind::separable)
    for (const auto& c : coords)
      if (!c.has_time()) fail(ErrorKind::shape, "separable covariance needs space-time coordinates");
}

}  // namespace

Eigen::MatrixXd covariance_matrix(const CovarianceModel& model, std::span<const Coordinate> coords) {
  check_dimensions(model, coords);
  const auto n = static_cast<Eigen::Index>(coords.size());
  Eigen::MatrixXd sigma(n, n);
  const double var = model.variance();
  for (Eigen::Index i = 0; i < n; ++i) {
    sigma(i, i) = var;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = model.between(coords[static_cast<std::size_t>(i)], coords[static_cast<std::size_t>(j)]);
      sigma(i, j) = c;
      sigma(j, i) = c;
    }
  }
  return sigma;
}

Eigen::MatrixXd covariance_matrix(const CovarianceModel& model, std::span<const Coordinate> coords_a,
                                  std::span<const Coordinate> coords_b) {
  check_dimensions(model, coords_a);
  check_dimensions(model, coords_b);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(coords_a.size()),
                      static_cast<Eigen::Index>(coords_b.size()));
  for (std::size_t i = 0; i < coords_a.size(); ++i)
    for (std::size_t j = 0; j < coords_b.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = model.between(coords_a[i], coords_b[j]);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

SphericalParams fit_accumulated(const BinAccumulator& acc, std::optional<double> variance) {
  if (acc.total() == 0) fail(ErrorKind::empty_variogram, "no residual pairs within the variogram range");
  return fit_spherical(acc.finish(variance));
}

}  // namespace

CovarianceModel fit_covariance(std::span<const double> residuals, std::span<const Coordinate> coords,
                               const VariogramOptions& options) {
  const std::size_t n = coords.size();
  if (residuals.size() != n) fail(ErrorKind::shape, "residual count does not match coordinates");
  if (n < 2) fail(ErrorKind::insufficient_data, "covariance fit needs at least 2 observations");
  const auto variance = sample_variance(residuals);
  const bool timed = coords.front().has_time();

  const NeighborIndex index(coords);
  double max_s = 0.0, max_t = 0.0;
  for (std::size_t a = 0; a + 1 < index.n_locations(); ++a)
    for (std::size_t b = a + 1; b < index.n_locations(); ++b)
      max_s = std::max(max_s, std::hypot(index.location_s1(a) - index.location_s1(b),
                                         index.location_s2(a) - index.location_s2(b)));
  if (timed) {
    const auto [lo, hi] = std::minmax_element(coords.begin(), coords.end(),
                                              [](const Coordinate& a, const Coordinate& b) { return *a.t < *b.t; });
    max_t = *hi->t - *lo->t;
  }
  const double reach_s = options.max_dist_fraction * max_s;
  check_binning(options.n_bins, reach_s);

  if (!timed) {
    BinAccumulator acc(options.n_bins, reach_s);
    for (std::size_t i = 0; i < n; ++i)
      index.query(coords[i], reach_s, 0.0, [&](std::size_t j, double hs, double) {
        if (j > i) acc.add(hs, residuals[i] - residuals[j]);
      });
    return CovarianceModel::make_spatial(fit_accumulated(acc, variance));
  }

  const double reach_t = options.max_dist_fraction * max_t;
  check_binning(options.n_bins, reach_t);
  const double width_s = reach_s / static_cast<double>(options.n_bins);
  const double width_t = reach_t / static_cast<double>(options.n_bins);
  BinAccumulator same_time(options.n_bins, reach_s), near_time(options.n_bins, reach_s);
  BinAccumulator temporal(options.n_bins, reach_t);
  for (std::size_t i = 0; i < n; ++i) {
    index.query(coords[i], reach_s, width_t, [&](std::size_t j, double hs, double ht) {
      if (j <= i) return;
      const double de = residuals[i] - residuals[j];
      near_time.add(hs, de);
      if (ht == 0.0) same_time.add(hs, de);
    });
    index.query(coords[i], width_s, reach_t, [&](std::size_t j, double, double ht) {
      if (j > i) temporal.add(ht, residuals[i] - residuals[j]);
    });
  }
  const auto& spatial_acc = same_time.total() >= options.min_slice_pairs ? same_time : near_time;
  return CovarianceModel::make_separable(fit_accumulated(spatial_acc, variance),
                                         fit_accumulated(temporal, variance),
                                         options.normalize_temporal);
}

}  // namespace treeging

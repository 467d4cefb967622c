#include "treeging/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "treeging/errors.hpp"
#include "treeging/parallel.hpp"

namespace treeging {

namespace {

// Named RNG sub-streams of a spec seed.
enum Stream : std::uint64_t { locations = 1, covariates = 2, scenario_pick = 3, field = 4, interaction = 5, ranges = 6 };

constexpr double kJitter = 1e-10;
constexpr double kDomain = 10.0;

double exp_factor(double h, double range) {
  if (range <= 0.0) return h == 0.0 ? 1.0 : 0.0;
  return std::exp(-h / range);
}

std::vector<std::array<double, 2>> uniform_locations(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<std::array<double, 2>> out(n);
  for (auto& p : out) {
    p[0] = u(rng);
    p[1] = u(rng);
  }
  return out;
}

std::vector<std::array<double, 2>> grid_locations(std::size_t side) {
  std::vector<std::array<double, 2>> out;
  out.reserve(side * side);
  const auto at = [side](std::size_t i) {
    return side == 1 ? kDomain / 2 : kDomain * static_cast<double>(i) / static_cast<double>(side - 1);
  };
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j) out.push_back({at(i), at(j)});
  return out;
}

Eigen::VectorXd standard_normals(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = z(rng);
  return v;
}

// Lower Cholesky factor of a correlation matrix, with the generator jitter.
Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& corr) {
  Eigen::MatrixXd jittered = corr;
  jittered.diagonal().array() += kJitter;
  Eigen::LLT<Eigen::MatrixXd> llt(jittered);
  if (llt.info() != Eigen::Success) fail(ErrorKind::ill_conditioned, "generator covariance is not positive definite");
  return llt.matrixL();
}

Eigen::MatrixXd spatial_correlation(const std::vector<std::array<double, 2>>& pts, double range) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
  if (range <= 0.0) return c;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const double h = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
      c(i, j) = c(j, i) = exp_factor(h, range);
    }
  return c;
}

Eigen::MatrixXd temporal_correlation(std::size_t n_times, double range) {
  const auto n = static_cast<Eigen::Index>(n_times);
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) c(i, j) = c(j, i) = exp_factor(static_cast<double>(i - j), range);
  return c;
}

// Draw of a separable field on locations x times, flattened location-major:
// vec(L_s Z L_t').
Eigen::VectorXd separable_draw(const Eigen::MatrixXd& ls, const Eigen::MatrixXd& lt, std::mt19937_64& rng) {
  const Eigen::Index n_s = ls.rows(), n_t = lt.rows();
  Eigen::MatrixXd z(n_s, n_t);
  std::normal_distribution<double> nz;
  for (Eigen::Index i = 0; i < n_s; ++i)
    for (Eigen::Index j = 0; j < n_t; ++j) z(i, j) = nz(rng);
  const Eigen::MatrixXd f = ls.triangularView<Eigen::Lower>() * z * lt.triangularView<Eigen::Lower>().transpose();
  Eigen::VectorXd out(n_s * n_t);
  for (Eigen::Index i = 0; i < n_s; ++i) out.segment(i * n_t, n_t) = f.row(i).transpose();
  return out;
}

std::vector<std::string> covariate_names(const std::vector<std::size_t>& exposed) {
  std::vector<std::string> names;
  for (auto c : exposed) names.push_back("X" + std::to_string(c + 1));
  return names;
}

Dataset make_dataset(std::vector<Coordinate> coords, const Eigen::MatrixXd& all_x, const Eigen::VectorXd& y,
                     Eigen::Index first, const std::vector<std::size_t>& exposed) {
  Dataset d;
  const auto n = static_cast<Eigen::Index>(coords.size());
  d.coords = std::move(coords);
  d.X.resize(n, static_cast<Eigen::Index>(exposed.size()));
  for (std::size_t c = 0; c < exposed.size(); ++c)
    d.X.col(static_cast<Eigen::Index>(c)) = all_x.col(static_cast<Eigen::Index>(exposed[c])).segment(first, n);
  d.y = y.segment(first, n);
  d.covariate_names = covariate_names(exposed);
  return d;
}

void check_scenario_size(Scenario s, std::size_t n_spurious) {
  if ((s == Scenario::ii || s == Scenario::iv) && n_spurious == 0)
    fail(ErrorKind::config, "scenarios ii and iv need spurious covariates");
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::i: return "i";
    case Scenario::ii: return "ii";
    case Scenario::iii: return "iii";
    case Scenario::iv: return "iv";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "i") return Scenario::i;
  if (name == "ii" || name == "B") return Scenario::ii;
  if (name == "iii") return Scenario::iii;
  if (name == "iv" || name == "D") return Scenario::iv;
  fail(ErrorKind::config, "unknown scenario '" + std::string(name) + "' (expected i, ii, iii or iv)");
}

void SpatialSimSpec::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) fail(ErrorKind::config, "eta must be finite and >= 0");
  if (!(nu >= 0.0) || !std::isfinite(nu)) fail(ErrorKind::config, "nu must be finite and >= 0");
  const std::size_t n = train_locations ? train_locations->size() : n_train;
  if (n < 1) fail(ErrorKind::config, "simulation needs at least one training location");
  check_scenario_size(scenario, n_spurious);
}

void SpaceTimeSimSpec::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) fail(ErrorKind::config, "eta must be finite and >= 0");
  if (!(spatial_range >= 0.0) || !(temporal_range >= 0.0) || !std::isfinite(spatial_range) ||
      !std::isfinite(temporal_range))
    fail(ErrorKind::config, "ranges must be finite and >= 0");
  if (n_train_locs < 1 || n_times < 1) fail(ErrorKind::config, "simulation needs locations and times");
  if (interaction_pair && (interaction_pair->first >= 3 + n_spurious || interaction_pair->second >= 3 + n_spurious))
    fail(ErrorKind::config, "interaction pair index out of range");
  check_scenario_size(scenario, n_spurious);
}

double TruthCovariance::correlation(const Coordinate& a, const Coordinate& b) const {
  double c = exp_factor(spatial_distance(a, b), spatial_range);
  if (temporal_range) c *= exp_factor(temporal_distance(a, b), *temporal_range);
  return c;
}

std::string TruthCovariance::describe() const {
  std::ostringstream out;
  out << "exponential(spatial_range=" << format_double(spatial_range);
  if (temporal_range) out << ", temporal_range=" << format_double(*temporal_range);
  out << ")";
  return out.str();
}

std::vector<std::size_t> scenario_covariates(Scenario scenario, std::size_t n_spurious, std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (scenario == Scenario::i || scenario == Scenario::ii) {
    out = {0, 1, 2};
  } else {
    std::mt19937_64 rng(derive_seed(seed, scenario_pick));
    std::uniform_int_distribution<std::size_t> drop(0, 2);
    const std::size_t dropped = drop(rng);
    for (std::size_t c = 0; c < 3; ++c)
      if (c != dropped) out.push_back(c);
  }
  if (scenario == Scenario::ii || scenario == Scenario::iv)
    for (std::size_t c = 0; c < n_spurious; ++c) out.push_back(3 + c);
  return out;
}

SimulatedField simulate_spatial(const SpatialSimSpec& spec) {
  spec.validate();
  std::mt19937_64 loc_rng(derive_seed(spec.seed, locations));
  auto train_pts = spec.train_locations ? *spec.train_locations : uniform_locations(spec.n_train, loc_rng, 0.0, kDomain);
  const auto test_pts = grid_locations(spec.grid_side);
  std::vector<std::array<double, 2>> all = train_pts;
  all.insert(all.end(), test_pts.begin(), test_pts.end());
  const auto n = static_cast<Eigen::Index>(all.size());
  const auto n_cov = static_cast<Eigen::Index>(3 + spec.n_spurious);

  std::mt19937_64 cov_rng(derive_seed(spec.seed, covariates));
  Eigen::MatrixXd x(n, n_cov);
  std::normal_distribution<double> z;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < n_cov; ++c) x(i, c) = z(cov_rng);

  Eigen::VectorXd mu(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = x(i, 0), x2 = x(i, 1), x3 = x(i, 2);
    mu(i) = spec.eta * (x1 + (x2 >= 0.0 ? 1.0 : 0.0) - (x2 < 0.0 ? 1.0 : 0.0) + 3.0 / (1.0 + std::exp(-2.0 * x3 + 3.0)));
  }

  std::mt19937_64 field_rng(derive_seed(spec.seed, field));
  const Eigen::VectorXd noise = standard_normals(static_cast<std::size_t>(n), field_rng);
  Eigen::VectorXd y = mu;
  if (spec.nu > 0.0) y += correlation_factor(spatial_correlation(all, spec.nu)).triangularView<Eigen::Lower>() * noise;
  else y += noise;

  SimulatedField out;
  out.truth_cov = {spec.nu, std::nullopt};
  out.exposed = scenario_covariates(spec.scenario, spec.n_spurious, spec.seed);
  std::vector<Coordinate> train_c, test_c;
  for (const auto& p : train_pts) train_c.push_back({p[0], p[1], std::nullopt});
  for (const auto& p : test_pts) test_c.push_back({p[0], p[1], std::nullopt});
  const auto n_train = static_cast<Eigen::Index>(train_pts.size());
  out.train = make_dataset(std::move(train_c), x, y, 0, out.exposed);
  out.test = make_dataset(std::move(test_c), x, y, n_train, out.exposed);
  out.train_mean = mu.head(n_train);
  out.test_mean = mu.tail(n - n_train);
  return out;
}

SimulatedField simulate_spacetime(const SpaceTimeSimSpec& spec) {
  spec.validate();
  std::mt19937_64 loc_rng(derive_seed(spec.seed, locations));
  const auto train_pts = uniform_locations(spec.n_train_locs, loc_rng, 0.0, kDomain);
  const auto test_pts = grid_locations(spec.grid_side);
  std::vector<std::array<double, 2>> all = train_pts;
  all.insert(all.end(), test_pts.begin(), test_pts.end());
  const auto n_t = static_cast<Eigen::Index>(spec.n_times);
  const auto n = static_cast<Eigen::Index>(all.size()) * n_t;
  const std::size_t n_cov = 3 + spec.n_spurious;

  // Covariates: separable exponential GPs with random ranges.
  std::mt19937_64 range_rng(derive_seed(spec.seed, ranges));
  std::uniform_real_distribution<double> spatial_u(0.5, 5.0), temporal_u(1.0, 10.0);
  std::mt19937_64 cov_rng(derive_seed(spec.seed, covariates));
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(n_cov));
  for (std::size_t c = 0; c < n_cov; ++c) {
    const double rs = spatial_u(range_rng);
    const double rt = temporal_u(range_rng);
    const auto ls = correlation_factor(spatial_correlation(all, rs));
    const auto lt = correlation_factor(temporal_correlation(spec.n_times, rt));
    x.col(static_cast<Eigen::Index>(c)) = separable_draw(ls, lt, cov_rng);
  }

  auto pair = spec.interaction_pair;
  if (!pair) {
    std::mt19937_64 rng(derive_seed(spec.seed, interaction));
    std::uniform_int_distribution<std::size_t> drop(0, 2);
    const std::size_t dropped = drop(rng);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < 3; ++c)
      if (c != dropped) keep.push_back(c);
    pair = std::make_pair(keep[0], keep[1]);
  }

  Eigen::VectorXd mu(n);
  const auto pi = static_cast<Eigen::Index>(pair->first), pj = static_cast<Eigen::Index>(pair->second);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = x(i, 0), x2 = x(i, 1), x3 = x(i, 2);
    mu(i) = spec.eta * (0.5 * x1 + (x2 <= 0.1 ? 0.75 : 0.0) - (x2 > 0.1 ? 0.75 : 0.0) +
                        2.0 / (1.0 + std::exp(-2.0 * x3)) + x(i, pi) * x(i, pj));
  }

  std::mt19937_64 field_rng(derive_seed(spec.seed, field));
  const auto ls = correlation_factor(spatial_correlation(all, spec.spatial_range));
  const auto lt = correlation_factor(temporal_correlation(spec.n_times, spec.temporal_range));
  const Eigen::VectorXd y = mu + separable_draw(ls, lt, field_rng);

  SimulatedField out;
  out.truth_cov = {spec.spatial_range, spec.temporal_range};
  out.exposed = scenario_covariates(spec.scenario, spec.n_spurious, spec.seed);
  out.interaction_pair = pair;
  std::vector<Coordinate> train_c, test_c;
  for (std::size_t l = 0; l < all.size(); ++l)
    for (Eigen::Index t = 0; t < n_t; ++t) {
      Coordinate c{all[l][0], all[l][1], static_cast<double>(t + 1)};
      (l < train_pts.size() ? train_c : test_c).push_back(c);
    }
  const auto n_train = static_cast<Eigen::Index>(train_c.size());
  out.train = make_dataset(std::move(train_c), x, y, 0, out.exposed);
  out.test = make_dataset(std::move(test_c), x, y, n_train, out.exposed);
  out.train_mean = mu.head(n_train);
  out.test_mean = mu.tail(n - n_train);
  return out;
}

std::vector<double> spatial_eta_grid() {
  std::vector<double> v;
  for (int k = 0; k <= 20; ++k) v.push_back(k / 10.0);
  return v;
}

std::vector<double> spatial_nu_grid() {
  std::vector<double> v{0.0, 0.05};
  for (int k = 4; k <= 50; ++k) v.push_back(k / 40.0);
  return v;
}

std::vector<double> spacetime_eta_grid() {
  std::vector<double> v;
  for (int k = 0; k <= 10; ++k) v.push_back(k / 5.0);
  return v;
}

std::vector<double> spacetime_spatial_ranges() {
  std::vector<double> v;
  for (int k = 0; k <= 16; ++k) v.push_back(std::max(0.0, 2.0 - std::sqrt(k / 4.0)));
  return v;
}

std::vector<double> spacetime_temporal_ranges() { return {0.0, 2.5, 5.0, 7.5, 10.0}; }

std::vector<SpatialSimSpec> spatial_full_grid(Scenario scenario, std::uint64_t master_seed) {
  std::vector<SpatialSimSpec> out;
  for (double eta : spatial_eta_grid())
    for (double nu : spatial_nu_grid()) {
      SpatialSimSpec s;
      s.eta = eta;
      s.nu = nu;
      s.scenario = scenario;
      s.seed = derive_seed(master_seed, out.size());
      out.push_back(std::move(s));
    }
  return out;
}

std::vector<SpaceTimeSimSpec> spacetime_full_grid(Scenario scenario, std::uint64_t master_seed,
                                                   std::optional<std::vector<double>> temporal_ranges) {
  const auto temporal = temporal_ranges ? *temporal_ranges : spacetime_temporal_ranges();
  std::vector<SpaceTimeSimSpec> out;
  for (double eta : spacetime_eta_grid())
    for (double rs : spacetime_spatial_ranges())
      for (double rt : temporal) {
        SpaceTimeSimSpec s;
        s.eta = eta;
        s.spatial_range = rs;
        s.temporal_range = rt;
        s.scenario = scenario;
        s.seed = derive_seed(master_seed, out.size());
        out.push_back(s);
      }
  return out;
}

MeanCorrelation mean_correlation(const TruthCovariance& cov, std::span<const Coordinate> train,
                                 std::span<const Coordinate> test, std::size_t k) {
  if (k < 1 || k > train.size())
    fail(ErrorKind::config, "mean correlation needs 1 <= k <= " + std::to_string(train.size()) + ", got k = " +
                                std::to_string(k));
  MeanCorrelation out;
  out.per_point.resize(static_cast<Eigen::Index>(test.size()));
  std::vector<double> corr(train.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    for (std::size_t j = 0; j < train.size(); ++j) corr[j] = cov.correlation(test[i], train[j]);
    std::partial_sort(corr.begin(), corr.begin() + static_cast<std::ptrdiff_t>(k), corr.end(), std::greater<>());
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += corr[j];
    out.per_point(static_cast<Eigen::Index>(i)) = sum / static_cast<double>(k);
  }
  out.mean = test.empty() ? 0.0 : out.per_point.mean();
  return out;
}

MeanCorrelation mean_correlation(const SimulatedField& field, std::size_t k) {
  return mean_correlation(field.truth_cov, field.train.coords, field.test.coords, k);
}

namespace {

struct StandinCovariate {
  const char* name;
  double mean;
  double sd;
  bool static_in_time;
};

constexpr StandinCovariate kStandinCovariates[] = {
    {"elevation", 1700.0, 300.0, true},
    {"boundary_layer_height", 1200.0, 400.0, false},
    {"surface_pressure", 83000.0, 1500.0, false},
    {"relative_humidity", 45.0, 15.0, false},
    {"temperature_2m", 295.0, 6.0, false},
    {"wind_u", 1.0, 2.5, false},
    {"wind_v", 0.5, 2.5, false},
    {"inv_dist_wildfire", 0.0001, 0.00004, false},
    {"traffic_1km", 20000.0, 8000.0, true},
    {"agricultural_1km", 20.0, 10.0, true},
    {"urban_1km", 30.0, 15.0, true},
    {"vegetation_1km", 25.0, 10.0, true},
    {"ndvi", 0.3, 0.1, false},
    {"no2_column", 35.0, 0.3, false},
    {"wrf_chem_ozone", 4.0, 0.15, false},
};

}  // namespace

CsvSchema standin_schema() {
  CsvSchema s;
  s.coordinates = {"longitude", "latitude", "date"};
  s.response = "ozone";
  for (const auto& c : kStandinCovariates) s.covariates.emplace_back(c.name);
  return s;
}

Dataset simulate_standin(const StandinSpec& spec) {
  if (spec.n_locations < 1 || spec.n_days < 1) fail(ErrorKind::config, "stand-in needs locations and days");
  std::mt19937_64 loc_rng(derive_seed(spec.seed, locations));
  std::uniform_real_distribution<double> lon(-106.0, -103.0), lat(38.5, 41.5);
  std::vector<std::array<double, 2>> pts(spec.n_locations);
  for (auto& p : pts) {
    p[0] = lon(loc_rng);
    p[1] = lat(loc_rng);
  }
  const auto n_t = static_cast<Eigen::Index>(spec.n_days);
  const auto n = static_cast<Eigen::Index>(pts.size()) * n_t;
  constexpr auto n_cov = static_cast<Eigen::Index>(std::size(kStandinCovariates));

  std::mt19937_64 range_rng(derive_seed(spec.seed, ranges));
  std::uniform_real_distribution<double> spatial_u(0.3, 1.5), temporal_u(1.0, 10.0);
  std::mt19937_64 cov_rng(derive_seed(spec.seed, covariates));
  Eigen::MatrixXd z(n, n_cov);
  for (Eigen::Index c = 0; c < n_cov; ++c) {
    const auto ls = correlation_factor(spatial_correlation(pts, spatial_u(range_rng)));
    const double rt = temporal_u(range_rng);
    if (kStandinCovariates[c].static_in_time) {
      Eigen::MatrixXd one = Eigen::MatrixXd::Zero(n_t, n_t);
      one.col(0).setOnes();  // every day copies the same spatial draw
      z.col(c) = separable_draw(ls, one, cov_rng);
    } else {
      z.col(c) = separable_draw(ls, correlation_factor(temporal_correlation(spec.n_days, rt)), cov_rng);
    }
  }

  const auto col = [&](const char* name) {
    for (Eigen::Index c = 0; c < n_cov; ++c)
      if (std::string_view(kStandinCovariates[c].name) == name) return z.col(c);
    return z.col(0);
  };
  Eigen::VectorXd mu = 40.0 + 5.0 * col("wrf_chem_ozone").array() + 3.0 * col("temperature_2m").array() -
                       2.0 * col("relative_humidity").array() + 1.5 * col("boundary_layer_height").array() +
                       2.0 * (col("elevation").array() > 0.0).cast<double>() -
                       1.5 * col("no2_column").array().tanh() + 1.0 * col("urban_1km").array() *
                                                                     col("wind_u").array();

  std::mt19937_64 field_rng(derive_seed(spec.seed, field));
  const auto ls = correlation_factor(spatial_correlation(pts, 0.6));
  const auto lt = correlation_factor(temporal_correlation(spec.n_days, 3.0));
  Eigen::VectorXd y = mu + 4.0 * separable_draw(ls, lt, field_rng) + 2.0 * standard_normals(static_cast<std::size_t>(n), field_rng);

  Dataset d;
  d.coords.reserve(static_cast<std::size_t>(n));
  for (const auto& p : pts)
    for (Eigen::Index t = 0; t < n_t; ++t) d.coords.push_back({p[0], p[1], static_cast<double>(t + 1)});
  d.X.resize(n, n_cov);
  for (Eigen::Index c = 0; c < n_cov; ++c) {
    d.X.col(c) = kStandinCovariates[c].mean + kStandinCovariates[c].sd * z.col(c).array();
    d.covariate_names.emplace_back(kStandinCovariates[c].name);
  }
  d.y = y;
  return d;
}

}  // namespace treeging

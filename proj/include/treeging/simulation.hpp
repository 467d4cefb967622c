#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "treeging/data.hpp"

namespace treeging {

// Which covariates the models get to see (coordinates are always appended):
//   i   - the three informative covariates
//   ii  - informative + spurious
//   iii - two of the three informative, chosen at random
//   iv  - the scenario iii pair + spurious
enum class Scenario { i, ii, iii, iv };

std::string_view to_string(Scenario s);
// Accepts i..iv; the letter aliases B and D map to ii and iv.
Scenario parse_scenario(std::string_view name);

struct SpatialSimSpec {
  double eta = 1.0;
  double nu = 0.5;  // exponential range; 0 gives independent noise
  std::size_t n_train = 100;
  std::size_t grid_side = 21;  // test grid over [0, 10]^2; 0 for no test set
  Scenario scenario = Scenario::i;
  std::uint64_t seed = 0;
  std::size_t n_spurious = 17;
  // Fixed training locations instead of uniform draws on (0, 10)^2.
  std::optional<std::vector<std::array<double, 2>>> train_locations;

  void validate() const;
};

struct SpaceTimeSimSpec {
  double eta = 1.0;
  double spatial_range = 1.0;
  double temporal_range = 5.0;
  std::size_t n_train_locs = 40;
  std::size_t grid_side = 11;
  std::size_t n_times = 30;  // times 1..n_times
  Scenario scenario = Scenario::i;
  std::uint64_t seed = 0;
  // Zero-based covariate indices of the X_i X_j term; drawn from the
  // informative three when empty.
  std::optional<std::pair<std::size_t, std::size_t>> interaction_pair;
  std::size_t n_spurious = 17;

  void validate() const;
};

// Unit-sill exponential correlation used to generate a field:
// exp(-h_s / spatial) for spatial fields, times exp(-h_t / temporal) for
// separable space-time fields. A zero range makes that factor 1 at zero lag
// and 0 elsewhere.
struct TruthCovariance {
  double spatial_range = 0.0;
  std::optional<double> temporal_range;

  double correlation(const Coordinate& a, const Coordinate& b) const;
  std::string describe() const;
};

struct SimulatedField {
  Dataset train;
  Dataset test;
  TruthCovariance truth_cov;
  Eigen::VectorXd train_mean;  // mu_Y at the training rows
  Eigen::VectorXd test_mean;   // mu_Y at the test rows
  std::vector<std::size_t> exposed;  // zero-based indices of the visible covariates
  std::optional<std::pair<std::size_t, std::size_t>> interaction_pair;
};

SimulatedField simulate_spatial(const SpatialSimSpec& spec);
SimulatedField simulate_spacetime(const SpaceTimeSimSpec& spec);

// Exposed covariate indices for a scenario, given 3 informative covariates
// followed by n_spurious spurious ones.
std::vector<std::size_t> scenario_covariates(Scenario scenario, std::size_t n_spurious, std::uint64_t seed);

// Parameter grids.
std::vector<double> spatial_eta_grid();       // 0, 0.1, ..., 2
std::vector<double> spatial_nu_grid();        // 49 values from 0 to 1.25
std::vector<double> spacetime_eta_grid();     // 0, 0.2, ..., 2
std::vector<double> spacetime_spatial_ranges();   // 2 - sqrt(u), u = 0, 0.25, ..., 4
std::vector<double> spacetime_temporal_ranges();  // 0, 2.5, 5, 7.5, 10

// Full factorial grids. Cell c gets seed derive_seed(master_seed, c).
std::vector<SpatialSimSpec> spatial_full_grid(Scenario scenario, std::uint64_t master_seed);
std::vector<SpaceTimeSimSpec> spacetime_full_grid(Scenario scenario, std::uint64_t master_seed,
                                                   std::optional<std::vector<double>> temporal_ranges = {});

struct MeanCorrelation {
  Eigen::VectorXd per_point;
  double mean = 0.0;
};

// For every test point, the average of its k largest true correlations with
// the training points; `mean` is the grand mean over test points.
MeanCorrelation mean_correlation(const TruthCovariance& cov, std::span<const Coordinate> train,
                                 std::span<const Coordinate> test, std::size_t k = 5);
MeanCorrelation mean_correlation(const SimulatedField& field, std::size_t k = 5);

// Synthetic data shaped like the ozone monitor case study: n_locations
// monitors observed daily for n_days, with the case-study covariate columns.
struct StandinSpec {
  std::size_t n_locations = 100;
  std::size_t n_days = 118;
  std::uint64_t seed = 0;
};

// Column names of the stand-in: coordinates (longitude, latitude, date),
// response and covariates.
CsvSchema standin_schema();
Dataset simulate_standin(const StandinSpec& spec);

}  // namespace treeging

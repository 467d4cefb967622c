#include <doctest.h>

#include <cmath>
#include <set>

#include "treeging/errors.hpp"
#include "treeging/simulation.hpp"

using namespace treeging;

TEST_CASE("spatial defaults") {
  SpatialSimSpec spec;
  spec.seed = 7;
  const auto f = simulate_spatial(spec);
  CHECK(f.train.size() == 100);
  CHECK(f.test.size() == 441);
  CHECK(f.train.n_covariates() == 3);
  CHECK(f.test_mean.size() == 441);
  for (const auto& c : f.train.coords) {
    CHECK(c.s1 > 0.0);
    CHECK(c.s1 < 10.0);
  }
  CHECK(f.test.coords.front() == Coordinate{0.0, 0.0, {}});
  CHECK(f.test.coords.back() == Coordinate{10.0, 10.0, {}});

  const auto again = simulate_spatial(spec);
  CHECK(again.train.y == f.train.y);
  CHECK(again.test.X == f.test.X);
}

TEST_CASE("zero effect size and zero range") {
  SpatialSimSpec spec;
  spec.eta = 0.0;
  spec.nu = 0.0;
  const auto f = simulate_spatial(spec);
  CHECK(f.train_mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.test_mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.truth_cov.correlation({0, 0, {}}, {0.01, 0, {}}) == 0.0);
  CHECK(f.truth_cov.correlation({0, 0, {}}, {0, 0, {}}) == 1.0);
  CHECK(mean_correlation(f).mean == 0.0);
}

TEST_CASE("scenario masks") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CHECK(scenario_covariates(Scenario::i, 17, seed) == std::vector<std::size_t>{0, 1, 2});
    CHECK(scenario_covariates(Scenario::ii, 17, seed).size() == 20);
    const auto iii = scenario_covariates(Scenario::iii, 17, seed);
    const auto iv = scenario_covariates(Scenario::iv, 17, seed);
    CHECK(iii.size() == 2);
    for (auto k : iii) CHECK(k < 3);
    REQUIRE(iv.size() == 19);
    CHECK(std::vector<std::size_t>(iv.begin(), iv.begin() + 2) == iii);
    CHECK(std::count_if(iv.begin(), iv.end(), [](std::size_t k) { return k >= 3; }) == 17);
  }
  CHECK(parse_scenario("B") == Scenario::ii);
  CHECK(parse_scenario("D") == Scenario::iv);
  CHECK(parse_scenario("iii") == Scenario::iii);
  CHECK_THROWS_AS(parse_scenario("v"), Error);
}

TEST_CASE("space-time defaults") {
  SpaceTimeSimSpec spec;
  spec.seed = 3;
  const auto f = simulate_spacetime(spec);
  CHECK(f.train.size() == 1200);
  CHECK(f.test.size() == 3630);
  CHECK(f.train.is_spacetime());
  REQUIRE(f.interaction_pair.has_value());
  CHECK(f.interaction_pair->first < 3);
  CHECK(f.interaction_pair->second < 3);
  CHECK(f.interaction_pair->first != f.interaction_pair->second);

  spec.eta = 0.0;
  spec.spatial_range = 2.0 - std::sqrt(4.0);
  const auto g = simulate_spacetime(spec);
  CHECK(g.train_mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.truth_cov.correlation({0, 0, 1.0}, {0.5, 0, 1.0}) == 0.0);
}

TEST_CASE("grids") {
  const auto eta = spatial_eta_grid();
  CHECK(eta.size() == 21);
  CHECK(eta.front() == 0.0);
  CHECK(eta.back() == doctest::Approx(2.0));
  CHECK(eta[7] == doctest::Approx(0.7));
  const auto nu = spatial_nu_grid();
  CHECK(nu.size() == 49);
  CHECK(nu[0] == 0.0);
  CHECK(nu[1] == doctest::Approx(0.05));
  CHECK(nu.back() == doctest::Approx(1.25));
  CHECK(spatial_full_grid(Scenario::i, 1).size() == 1029);
  CHECK(spacetime_eta_grid().size() == 11);
  const auto rs = spacetime_spatial_ranges();
  CHECK(rs.size() == 17);
  CHECK(rs.front() == 2.0);
  CHECK(rs.back() == 0.0);
  CHECK(spacetime_temporal_ranges() == std::vector<double>{0, 2.5, 5, 7.5, 10});

  const auto cells = spatial_full_grid(Scenario::iv, 5);
  std::set<std::uint64_t> seeds;
  for (const auto& c : cells) seeds.insert(c.seed);
  CHECK(seeds.size() == cells.size());
}

TEST_CASE("mean correlation by hand") {
  const TruthCovariance cov{1.0, {}};
  const std::vector<Coordinate> train{{0.5, 0, {}}, {0, 1, {}}, {1.5, 0, {}}, {0, -2, {}}, {2.5, 0, {}}, {3, 0, {}}};
  const std::vector<Coordinate> test{{0, 0, {}}};
  const double expect = (std::exp(-0.5) + std::exp(-1.0) + std::exp(-1.5) + std::exp(-2.0) + std::exp(-2.5)) / 5.0;
  CHECK(mean_correlation(cov, train, test).mean == doctest::Approx(expect).epsilon(1e-14));

  // coincident point tops out at 1
  const std::vector<Coordinate> hit{{3, 0, {}}};
  CHECK(mean_correlation(cov, train, hit, 1).mean == 1.0);
  CHECK_THROWS_AS(mean_correlation(cov, train, test, 7), Error);

  // monotone in the range
  double prev = -1.0;
  for (double nu : {0.0, 0.1, 0.5, 1.0, 2.0}) {
    const double m = mean_correlation(TruthCovariance{nu, {}}, train, test).mean;
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("stand-in shape") {
  StandinSpec spec;
  spec.n_locations = 10;
  spec.n_days = 5;
  const auto d = simulate_standin(spec);
  CHECK(d.size() == 50);
  CHECK(d.n_covariates() == 15);
  CHECK(d.is_spacetime());
  const auto schema = standin_schema();
  CHECK(schema.coordinates == std::vector<std::string>{"longitude", "latitude", "date"});
  CHECK(schema.covariates == d.covariate_names);
}

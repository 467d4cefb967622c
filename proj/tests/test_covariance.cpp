#include <doctest.h>

#include <cmath>
#include <random>

#include "treeging/covariance.hpp"
#include "treeging/errors.hpp"

using namespace treeging;

namespace {

// independent hand-coded closed forms
double gamma_ref(double h, double a, double s, double r) {
  if (h == 0.0) return 0.0;
  if (h > r) return s;
  return a + (s - a) * (1.5 * h / r - 0.5 * std::pow(h / r, 3));
}

EmpiricalVariogram noiseless(double a, double s, double r, std::size_t bins, double max_dist) {
  EmpiricalVariogram v;
  v.max_dist = max_dist;
  v.bin_half_width = 0.5 * max_dist / static_cast<double>(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double h = (2.0 * static_cast<double>(k) + 1.0) * v.bin_half_width;
    v.bin_centers.push_back(h);
    v.semivariances.push_back(gamma_ref(h, a, s, r));
    v.pair_counts.push_back(10);
  }
  return v;
}

}  // namespace

TEST_CASE("spherical closed forms") {
  const SphericalParams p{0.0, 1.0, 2.0};
  CHECK(spherical_variogram(1.0, p) == doctest::Approx(0.6875).epsilon(1e-15));
  CHECK(spherical_variogram(0.0, {0.3, 1.0, 2.0}) == 0.0);
  CHECK(spherical_variogram(2.5, {0.3, 1.7, 2.0}) == 1.7);
  CHECK(spherical_covariance(1.0, {0.2, 1.0, 2.0}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(spherical_covariance(0.0, {0.2, 1.3, 2.0}) == 1.3);
  CHECK(spherical_covariance(2.0 + 1e-12, {0.2, 1.3, 2.0}) == 0.0);
  CHECK(spherical_covariance_between(0.0, {0.2, 1.3, 2.0}) == doctest::Approx(1.1));
  CHECK_THROWS_AS(spherical_variogram(-1.0, p), Error);
  CHECK_THROWS_AS(spherical_covariance(-1.0, p), Error);
  CHECK_THROWS_AS(SphericalParams({2.0, 1.0, 1.0}).validate(), Error);
}

TEST_CASE("covariance plus variogram is the sill") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double s = 0.1 + 5 * u(rng), a = s * u(rng), r = 0.1 + 3 * u(rng);
    const SphericalParams p{a, s, r};
    double prev = spherical_covariance(0.0, p);
    for (double f : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0, 2.0}) {
      const double h = f * r;
      CHECK(std::abs(spherical_covariance(h, p) + spherical_variogram(h, p) - s) < 1e-12);
      CHECK(spherical_variogram(h, p) == doctest::Approx(gamma_ref(h, a, s, r)).epsilon(1e-13));
      CHECK(spherical_covariance(h, p) <= prev);
      prev = spherical_covariance(h, p);
    }
  }
}

TEST_CASE("empirical variogram") {
  SUBCASE("one pair") {
    const std::vector<double> e{0.0, 2.0};
    const std::vector<DistancePair> pairs{{0, 1, 0.5, {}}};
    const auto v = empirical_variogram(e, pairs, 3, 3.0);
    CHECK(v.pair_counts[0] == 1);
    CHECK(v.semivariances[0] == 2.0);
    CHECK(v.bin_centers[1] == doctest::Approx(1.5));
  }
  SUBCASE("two pairs in one bin") {
    const std::vector<double> e{0.0, 1.0, 3.0};
    const std::vector<DistancePair> pairs{{0, 1, 0.4, {}}, {0, 2, 0.6, {}}, {1, 2, 5.0, {}}};
    const auto v = empirical_variogram(e, pairs, 1, 1.0);
    CHECK(v.pair_counts[0] == 2);
    CHECK(v.semivariances[0] == 2.5);
  }
  SUBCASE("shift invariance and constant residuals") {
    const std::vector<double> e{0.3, 1.1, -2.0, 0.7};
    std::vector<double> shifted;
    for (double x : e) shifted.push_back(x + 100.0);
    const std::vector<Coordinate> c{{0, 0, {}}, {1, 0, {}}, {0, 2, {}}, {3, 1, {}}};
    const auto pairs = pairwise_distances(c);
    const auto a = empirical_variogram(e, pairs, 4, 3.5);
    const auto b = empirical_variogram(shifted, pairs, 4, 3.5);
    for (std::size_t k = 0; k < 4; ++k) CHECK(a.semivariances[k] == doctest::Approx(b.semivariances[k]));
    const std::vector<double> flat(4, 2.0);
    for (double g : empirical_variogram(flat, pairs, 4, 3.5).semivariances) CHECK(g == 0.0);
  }
  SUBCASE("all pairs beyond range") {
    const std::vector<double> e{0.0, 1.0};
    const std::vector<DistancePair> pairs{{0, 1, 10.0, {}}};
    CHECK_THROWS_AS(empirical_variogram(e, pairs, 3, 1.0), Error);
  }
}

TEST_CASE("spherical fit") {
  SUBCASE("noiseless recovery") {
    const auto p = fit_spherical(noiseless(0.1, 1.0, 0.8, 15, 1.6));
    CHECK(p.nugget == doctest::Approx(0.1).epsilon(0.05));
    CHECK(p.sill == doctest::Approx(1.0).epsilon(0.05));
    CHECK(p.range == doctest::Approx(0.8).epsilon(0.05));
  }
  SUBCASE("flat variogram is the independence limit") {
    auto v = noiseless(0.0, 1.0, 0.8, 15, 1.6);
    for (auto& g : v.semivariances) g = 0.7;
    const auto p = fit_spherical(v);
    CHECK(p.sill == doctest::Approx(0.7).epsilon(1e-3));
    CHECK(spherical_covariance(0.1, p) == doctest::Approx(0.0).epsilon(1e-3));
  }
  SUBCASE("single dominant bin") {
    auto v = noiseless(0.0, 1.0, 0.8, 15, 1.6);
    for (auto& w : v.pair_counts) w = 0;
    v.pair_counts[4] = 50;
    v.semivariances[4] = 0.42;
    const auto p = fit_spherical(v);
    CHECK(spherical_variogram(v.bin_centers[4], p) == doctest::Approx(0.42).epsilon(1e-6));
  }
  SUBCASE("bin order does not matter") {
    auto v = noiseless(0.2, 1.5, 0.6, 15, 1.6);
    for (std::size_t k = 0; k < v.semivariances.size(); ++k) v.semivariances[k] += 0.03 * std::sin(3.0 * k);
    auto w = v;
    std::reverse(w.bin_centers.begin(), w.bin_centers.end());
    std::reverse(w.semivariances.begin(), w.semivariances.end());
    std::reverse(w.pair_counts.begin(), w.pair_counts.end());
    const auto a = fit_spherical(v), b = fit_spherical(w);
    CHECK(a.nugget == doctest::Approx(b.nugget));
    CHECK(a.sill == doctest::Approx(b.sill));
    CHECK(a.range == doctest::Approx(b.range));
  }
  SUBCASE("too few bins") {
    CHECK_THROWS_AS(fit_spherical(noiseless(0.0, 1.0, 1.0, 2, 1.0)), Error);
  }
}

TEST_CASE("covariance matrices") {
  const auto model = CovarianceModel::make_spatial({0.0, 1.0, 2.0});
  SUBCASE("two points at r/2") {
    const std::vector<Coordinate> c{{0, 0, {}}, {1, 0, {}}};
    const auto S = covariance_matrix(model, c);
    CHECK(S(0, 1) == doctest::Approx(0.3125).epsilon(1e-15));
    CHECK(S(0, 0) == 1.0);
    CHECK(S == S.transpose());
  }
  SUBCASE("compact support") {
    const std::vector<Coordinate> c{{0, 0, {}}, {5, 0, {}}, {0, 9, {}}};
    const auto S = covariance_matrix(model, c);
    CHECK(Eigen::MatrixXd(S) == Eigen::MatrixXd::Identity(3, 3));
  }
  SUBCASE("separable product") {
    const auto st = CovarianceModel::make_separable({0.1, 2.0, 2.0}, {0.0, 4.0, 3.0});
    const Coordinate a{0, 0, 1.0}, b{1, 0, 2.0};
    const double cs = spherical_covariance(1.0, {0.1, 2.0, 2.0});
    const double ct = spherical_covariance(1.0, {0.0, 4.0, 3.0});
    CHECK(st.between(a, b) == doctest::Approx(cs * ct / 4.0).epsilon(1e-14));
    CHECK(st.variance() == doctest::Approx(2.0));
    const std::vector<Coordinate> c{a, b};
    CHECK(covariance_matrix(st, c)(0, 0) == doctest::Approx(2.0));
  }
  SUBCASE("pure nugget") {
    const auto pn = CovarianceModel::pure_nugget(3.0);
    CHECK(pn.is_independent());
    CHECK(pn.between({0, 0, {}}, {0, 0, {}}) == 0.0);
  }
}

TEST_CASE("fit_covariance") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::normal_distribution<double> z;
  std::vector<Coordinate> c;
  std::vector<double> e;
  for (int i = 0; i < 150; ++i) {
    c.push_back({u(rng), u(rng), {}});
    e.push_back(std::sin(c.back().s1) + 0.1 * z(rng));
  }
  const auto model = fit_covariance(e, c);
  CHECK(model.kind == CovarianceKind::spatial);
  CHECK(model.spatial.range > 0.5);
  CHECK(model.spatial.nugget < 0.5 * model.spatial.sill);

  std::vector<Coordinate> ct;
  std::vector<double> et;
  for (int l = 0; l < 20; ++l) {
    const double s1 = u(rng), s2 = u(rng);
    for (int t = 1; t <= 10; ++t) {
      ct.push_back({s1, s2, double(t)});
      et.push_back(std::sin(s1) + std::cos(0.3 * t) + 0.1 * z(rng));
    }
  }
  const auto st = fit_covariance(et, ct);
  CHECK(st.kind == CovarianceKind::separable);
  CHECK(st.temporal.has_value());
  CHECK_THROWS_AS(fit_covariance(std::vector<double>{1.0}, std::vector<Coordinate>{{0, 0, {}}}), Error);
}

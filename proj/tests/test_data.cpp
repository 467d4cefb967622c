#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "treeging/data.hpp"
#include "treeging/errors.hpp"

using namespace treeging;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("minimal csv") {
  std::istringstream in("s1,s2,y\n0,0,1\n1,0,2\n0,1,3\n");
  const auto d = read_csv(in, CsvSchema{});
  CHECK(d.size() == 3);
  CHECK(d.n_covariates() == 0);
  CHECK(!d.is_spacetime());
  CHECK(d.y[2] == 3.0);
}

TEST_CASE("space-time csv with a covariate") {
  std::istringstream in("s1,s2,t,y,x1\n0,0,1,1,5\n1,0,2,2,6\n");
  CsvSchema schema;
  schema.coordinates = {"s1", "s2", "t"};
  schema.covariates = {"x1"};
  const auto d = read_csv(in, schema);
  CHECK(d.is_spacetime());
  CHECK(d.n_covariates() == 1);
  CHECK(*d.coords[1].t == 2.0);
  CHECK(d.X(1, 0) == 6.0);
}

TEST_CASE("csv errors") {
  SUBCASE("nan response") {
    std::istringstream in("s1,s2,y\n0,0,1\n1,0,NaN\n");
    CHECK(kind_of([&] { read_csv(in, CsvSchema{}); }) == ErrorKind::validation);
  }
  SUBCASE("missing column") {
    std::istringstream in("s1,y\n0,1\n");
    CHECK(kind_of([&] { read_csv(in, CsvSchema{}); }) == ErrorKind::schema);
  }
  SUBCASE("non-numeric cell") {
    std::istringstream in("s1,s2,y\n0,0,abc\n");
    CHECK(kind_of([&] { read_csv(in, CsvSchema{}); }) == ErrorKind::parse);
  }
  SUBCASE("missing file") {
    CHECK(kind_of([&] { load_csv("/nonexistent/x.csv", CsvSchema{}); }) == ErrorKind::io);
  }
}

TEST_CASE("csv round trip") {
  Dataset d;
  d.coords = {{0.1, 1.0 / 3.0, 1.0}, {2.5, -1e-17, 2.0}};
  d.X.resize(2, 1);
  d.X << 3.14159265358979, -2.0 / 7.0;
  d.y = Eigen::Vector2d(1e300, -0.0);
  d.covariate_names = {"x1"};
  const auto schema = default_schema(d);
  std::stringstream buf;
  write_csv(d, buf, schema);
  const auto back = read_csv(buf, schema);
  CHECK(back.coords == d.coords);
  CHECK(back.X == d.X);
  CHECK(back.y == d.y);
}

TEST_CASE("pairwise distances") {
  SUBCASE("3-4-5") {
    const std::vector<Coordinate> c{{0, 0, {}}, {3, 4, {}}};
    const auto p = pairwise_distances(c);
    REQUIRE(p.size() == 1);
    CHECK(p[0].h_spatial == 5.0);
    CHECK(!p[0].h_temporal);
  }
  SUBCASE("coincident") {
    const std::vector<Coordinate> c{{0, 0, {}}, {0, 0, {}}};
    CHECK(pairwise_distances(c)[0].h_spatial == 0.0);
  }
  SUBCASE("count and order invariance") {
    std::vector<Coordinate> c{{0, 0, 1.0}, {1, 2, 3.0}, {4, 1, 2.0}, {2, 2, 7.0}};
    auto multiset = [](const std::vector<DistancePair>& p) {
      std::vector<std::pair<double, double>> v;
      for (const auto& x : p) v.emplace_back(x.h_spatial, *x.h_temporal);
      std::sort(v.begin(), v.end());
      return v;
    };
    const auto a = pairwise_distances(c);
    CHECK(a.size() == 6);
    for (const auto& x : a) CHECK(x.i < x.j);
    std::reverse(c.begin(), c.end());
    CHECK(multiset(a) == multiset(pairwise_distances(c)));
  }
  SUBCASE("too few") {
    const std::vector<Coordinate> c{{0, 0, {}}};
    CHECK(kind_of([&] { pairwise_distances(c); }) == ErrorKind::insufficient_data);
  }
}

TEST_CASE("feature matrix appends coordinates") {
  Dataset d;
  d.coords = {{1, 2, 3.0}};
  d.X = Eigen::MatrixXd::Constant(1, 2, 9.0);
  d.y = Eigen::VectorXd::Zero(1);
  d.covariate_names = {"a", "b"};
  const auto f = feature_matrix(d);
  REQUIRE(f.cols() == 5);
  CHECK(f(0, 2) == 1.0);
  CHECK(f(0, 3) == 2.0);
  CHECK(f(0, 4) == 3.0);
}

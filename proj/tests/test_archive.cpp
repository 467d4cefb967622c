#include <doctest.h>

#include <filesystem>

#include "treeging/errors.hpp"
#include "treeging/models.hpp"
#include "treeging/simulation.hpp"

using namespace treeging;

namespace {

SimulatedField small_field(bool spacetime) {
  if (spacetime) {
    SpaceTimeSimSpec s;
    s.n_train_locs = 12;
    s.n_times = 6;
    s.grid_side = 3;
    s.n_times = 6;
    s.seed = 2;
    return simulate_spacetime(s);
  }
  SpatialSimSpec s;
  s.grid_side = 5;
  s.seed = 2;
  return simulate_spatial(s);
}

}  // namespace

TEST_CASE("archive round trip for every model") {
  for (bool st : {false, true}) {
    const auto f = small_field(st);
    for (auto kind : all_model_kinds()) {
      auto config = ModelConfig::defaults(kind);
      config.ensemble.n_learners = 3;
      const auto model = fit_model(f.train, config);
      const auto text = to_archive(model);
      const auto back = from_archive(text);
      CHECK(back.kind() == kind);
      CHECK(back.covariate_names() == f.train.covariate_names);
      CHECK(back.predict(f.test) == model.predict(f.test));
      CHECK(to_archive(back) == text);
    }
  }
}

TEST_CASE("archive files and versions") {
  const auto f = small_field(false);
  auto config = ModelConfig::defaults(ModelKind::treeging);
  config.ensemble.n_learners = 2;
  const auto model = fit_model(f.train, config);
  const auto path = std::filesystem::temp_directory_path() / "treeging_archive_test.json";
  save_model(model, path);
  CHECK(load_model(path).predict(f.test) == model.predict(f.test));
  std::filesystem::remove(path);

  auto text = to_archive(model);
  const auto pos = text.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 11, "\"version\":2");
  try {
    from_archive(text);
    FAIL("expected a version error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::archive_version);
  }
  CHECK_THROWS_AS(from_archive("not json"), Error);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), Error);
}

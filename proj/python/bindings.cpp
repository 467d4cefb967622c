#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "treeging/covariance.hpp"
#include "treeging/data.hpp"
#include "treeging/errors.hpp"
#include "treeging/evaluation.hpp"
#include "treeging/models.hpp"
#include "treeging/simulation.hpp"

namespace py = pybind11;
using namespace treeging;

namespace {

Dataset make_dataset(const Eigen::MatrixXd& coords, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::vector<std::string> names) {
  if (coords.cols() != 2 && coords.cols() != 3) fail(ErrorKind::shape, "coords must have 2 or 3 columns");
  Dataset d;
  d.coords.reserve(static_cast<std::size_t>(coords.rows()));
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    Coordinate c{coords(i, 0), coords(i, 1), {}};
    if (coords.cols() == 3) c.t = coords(i, 2);
    d.coords.push_back(c);
  }
  d.X = X;
  d.y = y.size() == 0 ? Eigen::VectorXd::Zero(coords.rows()) : y;
  if (names.empty())
    for (Eigen::Index j = 0; j < X.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  d.covariate_names = std::move(names);
  d.validate();
  return d;
}

Eigen::MatrixXd coord_matrix(const Dataset& d) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d.size()), d.is_spacetime() ? 3 : 2);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    m(r, 0) = d.coords[i].s1;
    m(r, 1) = d.coords[i].s2;
    if (d.is_spacetime()) m(r, 2) = *d.coords[i].t;
  }
  return m;
}

ModelConfig make_config(const std::string& model, std::uint64_t seed, std::optional<std::size_t> n_learners,
                        std::optional<double> subsample_prop, std::optional<std::size_t> min_node_size,
                        bool pure_nugget) {
  auto config = ModelConfig::defaults(parse_model_kind(model));
  config.ensemble.master_seed = seed;
  if (n_learners) config.ensemble.n_learners = *n_learners;
  if (subsample_prop) config.ensemble.subsample_prop = *subsample_prop;
  if (min_node_size) config.ensemble.tree.min_node_size = *min_node_size;
  config.ensemble.force_pure_nugget = pure_nugget;
  return config;
}

py::dict field_dict(const SimulatedField& f) {
  py::dict out;
  out["train"] = f.train;
  out["test"] = f.test;
  out["train_mean"] = f.train_mean;
  out["test_mean"] = f.test_mean;
  out["exposed"] = f.exposed;
  return out;
}

}  // namespace

PYBIND11_MODULE(_treeging, m) {
  m.doc() = "Kriging-enriched regression tree ensembles and their baselines.";

  static PyObject* error_type = py::exception<Error>(m, "TreegingError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string kind(to_string(e.kind()));
      py::object value = py::handle(error_type)(kind + ": " + e.what());
      value.attr("kind") = kind;
      value.attr("exit_code") = exit_code(e.kind());
      PyErr_SetObject(error_type, value.ptr());
    }
  });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("coords"), py::arg("X"), py::arg("y") = Eigen::VectorXd(),
           py::arg("covariate_names") = std::vector<std::string>{})
      .def_property_readonly("coords", &coord_matrix)
      .def_readonly("X", &Dataset::X)
      .def_readonly("y", &Dataset::y)
      .def_readonly("covariate_names", &Dataset::covariate_names)
      .def_property_readonly("is_spacetime", &Dataset::is_spacetime)
      .def("__len__", &Dataset::size)
      .def("subset", [](const Dataset& d, const std::vector<std::size_t>& rows) { return d.subset(rows); })
      .def("to_csv", [](const Dataset& d, const std::string& path) { save_csv(d, path, default_schema(d)); });

  m.def(
      "load_csv",
      [](const std::string& path, std::vector<std::string> coordinates, std::string response,
         std::vector<std::string> covariates, bool response_required) {
        CsvSchema schema;
        schema.coordinates = std::move(coordinates);
        schema.response = std::move(response);
        schema.covariates = std::move(covariates);
        schema.response_required = response_required;
        return load_csv(path, schema);
      },
      py::arg("path"), py::arg("coordinates") = std::vector<std::string>{"s1", "s2"}, py::arg("response") = "y",
      py::arg("covariates") = std::vector<std::string>{}, py::arg("response_required") = true);

  py::class_<FittedModel>(m, "FittedModel")
      .def_property_readonly("kind", [](const FittedModel& f) { return std::string(to_string(f.kind())); })
      .def_property_readonly("covariate_names", &FittedModel::covariate_names)
      .def("predict", &FittedModel::predict, py::arg("data"), py::arg("jobs") = 1,
           py::call_guard<py::gil_scoped_release>())
      .def("warnings", &FittedModel::warnings)
      .def("to_archive", &to_archive)
      .def_static("from_archive", [](const std::string& text) { return from_archive(text); })
      .def("save", [](const FittedModel& f, const std::string& path) { save_model(f, path); })
      .def_static("load", [](const std::string& path) { return load_model(path); });

  m.def(
      "fit",
      [](const std::string& model, const Dataset& data, std::uint64_t seed, std::optional<std::size_t> n_learners,
         std::optional<double> subsample_prop, std::optional<std::size_t> min_node_size, bool pure_nugget,
         std::size_t jobs) {
        const auto config = make_config(model, seed, n_learners, subsample_prop, min_node_size, pure_nugget);
        py::gil_scoped_release release;
        return fit_model(data, config, jobs);
      },
      py::arg("model"), py::arg("data"), py::arg("seed") = 0, py::arg("n_learners") = py::none(),
      py::arg("subsample_prop") = py::none(), py::arg("min_node_size") = py::none(), py::arg("pure_nugget") = false,
      py::arg("jobs") = 1);

  m.def(
      "cross_validate",
      [](const std::string& model, const Dataset& data, const std::string& mode, std::size_t k, std::uint64_t seed,
         std::optional<std::size_t> n_learners, std::size_t jobs) {
        const auto config = make_config(model, seed, n_learners, std::nullopt, std::nullopt, false);
        const auto plan = make_folds(data, parse_fold_mode(mode), k, seed);
        EvalReport report;
        {
          py::gil_scoped_release release;
          report = cross_validate(data, model_runner(config, jobs), plan, model);
        }
        py::dict out;
        out["r2"] = report.r2;
        out["per_fold_r2"] = report.per_fold_r2;
        out["warnings"] = report.warnings;
        return out;
      },
      py::arg("model"), py::arg("data"), py::arg("mode") = "row", py::arg("k") = 10, py::arg("seed") = 0,
      py::arg("n_learners") = py::none(), py::arg("jobs") = 1);

  m.def("r_squared", &r_squared, py::arg("y"), py::arg("y_hat"));

  m.def(
      "simulate_spatial",
      [](double eta, double nu, std::size_t n_train, std::size_t grid_side, const std::string& scenario,
         std::uint64_t seed) {
        SpatialSimSpec spec;
        spec.eta = eta;
        spec.nu = nu;
        spec.n_train = n_train;
        spec.grid_side = grid_side;
        spec.scenario = parse_scenario(scenario);
        spec.seed = seed;
        return field_dict(simulate_spatial(spec));
      },
      py::arg("eta") = 1.0, py::arg("nu") = 0.5, py::arg("n_train") = 100, py::arg("grid_side") = 21,
      py::arg("scenario") = "i", py::arg("seed") = 0);

  m.def(
      "simulate_spacetime",
      [](double eta, double spatial_range, double temporal_range, std::size_t n_train_locs, std::size_t grid_side,
         std::size_t n_times, const std::string& scenario, std::uint64_t seed) {
        SpaceTimeSimSpec spec;
        spec.eta = eta;
        spec.spatial_range = spatial_range;
        spec.temporal_range = temporal_range;
        spec.n_train_locs = n_train_locs;
        spec.grid_side = grid_side;
        spec.n_times = n_times;
        spec.scenario = parse_scenario(scenario);
        spec.seed = seed;
        return field_dict(simulate_spacetime(spec));
      },
      py::arg("eta") = 1.0, py::arg("spatial_range") = 1.0, py::arg("temporal_range") = 5.0,
      py::arg("n_train_locs") = 40, py::arg("grid_side") = 11, py::arg("n_times") = 30, py::arg("scenario") = "i",
      py::arg("seed") = 0);

  py::class_<SphericalParams>(m, "SphericalParams")
      .def(py::init([](double nugget, double sill, double range) {
             SphericalParams p{nugget, sill, range};
             p.validate();
             return p;
           }),
           py::arg("nugget"), py::arg("sill"), py::arg("range"))
      .def_readonly("nugget", &SphericalParams::nugget)
      .def_readonly("sill", &SphericalParams::sill)
      .def_readonly("range", &SphericalParams::range)
      .def("__repr__", [](const SphericalParams& p) {
        std::ostringstream s;
        s << "SphericalParams(nugget=" << p.nugget << ", sill=" << p.sill << ", range=" << p.range << ")";
        return s.str();
      });

  m.def("spherical_variogram", &spherical_variogram, py::arg("h"), py::arg("params"));
  m.def("spherical_covariance", &spherical_covariance, py::arg("h"), py::arg("params"));
}

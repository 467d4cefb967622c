#include <fstream>
#include <sstream>

#include <json.hpp>

#include "treeging/errors.hpp"
#include "treeging/models.hpp"

namespace treeging {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "treeging-model";

json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json params_to_json(const SphericalParams& p) { return json::array({p.nugget, p.sill, p.range}); }

SphericalParams params_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json covariance_to_json(const CovarianceModel& c) {
  return {{"kind", c.kind == CovarianceKind::spatial ? "spatial" : "separable"},
          {"spatial", params_to_json(c.spatial)},
          {"temporal", c.temporal ? params_to_json(*c.temporal) : json(nullptr)},
          {"normalize_temporal", c.normalize_temporal}};
}

CovarianceModel covariance_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "spatial") return CovarianceModel::make_spatial(params_from_json(j.at("spatial")));
  if (kind == "separable")
    return CovarianceModel::make_separable(params_from_json(j.at("spatial")), params_from_json(j.at("temporal")),
                                           j.at("normalize_temporal").get<bool>());
  fail(ErrorKind::validation, "unknown covariance kind '" + kind + "'");
}

json coords_to_json(const std::vector<Coordinate>& coords) {
  json out = json::array();
  for (const auto& c : coords) {
    if (c.t) out.push_back({c.s1, c.s2, *c.t});
    else out.push_back({c.s1, c.s2});
  }
  return out;
}

std::vector<Coordinate> coords_from_json(const json& j) {
  std::vector<Coordinate> out;
  out.reserve(j.size());
  for (const auto& c : j) {
    Coordinate p{c.at(0).get<double>(), c.at(1).get<double>(), std::nullopt};
    if (c.size() == 3) p.t = c.at(2).get<double>();
    out.push_back(p);
  }
  return out;
}

json dependence_to_json(const DependenceTerm& d) {
  return {{"covariance", covariance_to_json(d.cov)},
          {"coords", coords_to_json(d.coords)},
          {"weights", vec_to_json(d.weights)}};
}

DependenceTerm dependence_from_json(const json& j) {
  DependenceTerm d{covariance_from_json(j.at("covariance")), coords_from_json(j.at("coords")),
                   vec_from_json(j.at("weights"))};
  if (!d.vanishes() && d.weights.size() != static_cast<Eigen::Index>(d.coords.size()))
    fail(ErrorKind::validation, "dependence weights do not match coordinates");
  return d;
}

json tree_to_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes()) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf, n.value});
  return {{"n_features", t.n_features()}, {"nodes", nodes}};
}

RegressionTree tree_from_json(const json& j) {
  std::vector<RegressionTree::Node> nodes;
  for (const auto& n : j.at("nodes"))
    nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                     n.at(4).get<int>(), n.at(5).get<double>()});
  return RegressionTree::from_nodes(std::move(nodes), j.at("n_features").get<std::size_t>());
}

json kriging_to_json(const KrigingModel& k) {
  return {{"design",
           {{"use_coordinates", k.design.use_coordinates},
            {"use_covariates", k.design.use_covariates},
            {"spacetime", k.design.spacetime},
            {"n_covariates", k.design.n_covariates},
            {"kept", k.design.kept}}},
          {"beta", vec_to_json(k.beta)},
          {"residuals", vec_to_json(k.residuals)},
          {"dependence", dependence_to_json(k.dependence)},
          {"sparse_solve", k.sparse_solve},
          {"warnings", k.warnings}};
}

KrigingModel kriging_from_json(const json& j) {
  KrigingModel k;
  const auto& d = j.at("design");
  k.design.use_coordinates = d.at("use_coordinates").get<bool>();
  k.design.use_covariates = d.at("use_covariates").get<bool>();
  k.design.spacetime = d.at("spacetime").get<bool>();
  k.design.n_covariates = d.at("n_covariates").get<std::size_t>();
  k.design.kept = d.at("kept").get<std::vector<std::size_t>>();
  k.beta = vec_from_json(j.at("beta"));
  k.residuals = vec_from_json(j.at("residuals"));
  k.dependence = dependence_from_json(j.at("dependence"));
  k.sparse_solve = j.at("sparse_solve").get<bool>();
  k.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (k.beta.size() != static_cast<Eigen::Index>(k.design.kept.size()))
    fail(ErrorKind::validation, "kriging coefficients do not match the design");
  return k;
}

const char* base_name(BaseLearner b) {
  switch (b) {
    case BaseLearner::treege: return "treege";
    case BaseLearner::tree: return "tree";
    case BaseLearner::kriging: return "kriging";
  }
  return "";
}

BaseLearner base_from(const std::string& s) {
  if (s == "treege") return BaseLearner::treege;
  if (s == "tree") return BaseLearner::tree;
  if (s == "kriging") return BaseLearner::kriging;
  fail(ErrorKind::validation, "unknown base learner '" + s + "'");
}

json config_to_json(const EnsembleConfig& c) {
  return {{"n_learners", c.n_learners},
          {"subsample_prop", c.subsample_prop},
          {"sampling", c.sampling == Sampling::bootstrap ? "bootstrap" : "without-replacement"},
          {"base", base_name(c.base)},
          {"min_node_size", c.tree.min_node_size},
          {"max_depth", c.tree.max_depth ? json(*c.tree.max_depth) : json(nullptr)},
          {"mtry", c.tree.mtry ? json(*c.tree.mtry) : json(nullptr)},
          {"master_seed", c.master_seed},
          {"force_pure_nugget", c.force_pure_nugget}};
}

EnsembleConfig config_from_json(const json& j) {
  EnsembleConfig c;
  c.n_learners = j.at("n_learners").get<std::size_t>();
  c.subsample_prop = j.at("subsample_prop").get<double>();
  c.sampling = j.at("sampling").get<std::string>() == "bootstrap" ? Sampling::bootstrap : Sampling::without_replacement;
  c.base = base_from(j.at("base").get<std::string>());
  c.tree.min_node_size = j.at("min_node_size").get<std::size_t>();
  if (!j.at("max_depth").is_null()) c.tree.max_depth = j.at("max_depth").get<std::size_t>();
  if (!j.at("mtry").is_null()) c.tree.mtry = j.at("mtry").get<std::size_t>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.force_pure_nugget = j.at("force_pure_nugget").get<bool>();
  return c;
}

json ensemble_to_json(const EnsembleModel& m) {
  json learners = json::array();
  for (const auto& l : m.learners) {
    json jl{{"subsample", l.subsample}};
    jl["tree"] = l.tree ? tree_to_json(*l.tree) : json(nullptr);
    jl["dependence"] = l.tree && m.config.base == BaseLearner::treege ? dependence_to_json(l.dependence) : json(nullptr);
    jl["kriging"] = l.kriging ? kriging_to_json(*l.kriging) : json(nullptr);
    jl["warning"] = l.warning ? json(*l.warning) : json(nullptr);
    learners.push_back(std::move(jl));
  }
  return {{"config", config_to_json(m.config)},
          {"n_covariates", m.n_covariates},
          {"spacetime", m.spacetime},
          {"learners", std::move(learners)}};
}

EnsembleModel ensemble_from_json(const json& j) {
  EnsembleModel m;
  m.config = config_from_json(j.at("config"));
  m.n_covariates = j.at("n_covariates").get<std::size_t>();
  m.spacetime = j.at("spacetime").get<bool>();
  for (const auto& jl : j.at("learners")) {
    Learner l;
    l.subsample = jl.at("subsample").get<std::vector<std::size_t>>();
    if (!jl.at("tree").is_null()) l.tree = tree_from_json(jl.at("tree"));
    if (!jl.at("dependence").is_null()) l.dependence = dependence_from_json(jl.at("dependence"));
    if (!jl.at("kriging").is_null()) l.kriging = kriging_from_json(jl.at("kriging"));
    if (!jl.at("warning").is_null()) l.warning = jl.at("warning").get<std::string>();
    if (!l.tree && !l.kriging) fail(ErrorKind::validation, "archived learner has no model");
    m.learners.push_back(std::move(l));
  }
  if (m.learners.empty()) fail(ErrorKind::validation, "archived ensemble has no learners");
  return m;
}

}  // namespace

std::string to_archive(const FittedModel& model) {
  json j{{"format", kFormatTag},
         {"version", kArchiveVersion},
         {"kind", std::string(to_string(model.kind()))},
         {"covariates", model.covariate_names()}};
  j["model"] = model.is_ensemble() ? ensemble_to_json(model.ensemble()) : kriging_to_json(model.kriging());
  return j.dump() + "\n";
}

FittedModel from_archive(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::archive_version, std::string("not a treeging model archive: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormatTag)
    fail(ErrorKind::archive_version, "not a treeging model archive");
  const int version = j.value("version", -1);
  if (version != kArchiveVersion)
    fail(ErrorKind::archive_version, "archive version " + std::to_string(version) + " is not supported (expected " +
                                         std::to_string(kArchiveVersion) + ")");
  try {
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    auto names = j.at("covariates").get<std::vector<std::string>>();
    if (kind == ModelKind::kriging) return {kind, kriging_from_json(j.at("model")), std::move(names)};
    return {kind, ensemble_from_json(j.at("model")), std::move(names)};
  } catch (const json::exception& e) {
    fail(ErrorKind::validation, std::string("malformed model archive: ") + e.what());
  }
}

void save_model(const FittedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out << to_archive(model);
  if (!out) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
}

FittedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_archive(ss.str());
}

}  // namespace treeging

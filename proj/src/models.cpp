#include "treeging/models.hpp"

#include "treeging/errors.hpp"

namespace treeging {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::treeging: return "treeging";
    case ModelKind::random_forest: return "rf";
    case ModelKind::kriging: return "kriging";
    case ModelKind::kriging_ensemble: return "kriging-ensemble";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "treeging") return ModelKind::treeging;
  if (name == "rf" || name == "random-forest") return ModelKind::random_forest;
  if (name == "kriging") return ModelKind::kriging;
  if (name == "kriging-ensemble" || name == "ke") return ModelKind::kriging_ensemble;
  fail(ErrorKind::config, "unknown model '" + std::string(name) +
                              "' (expected treeging, rf, kriging or kriging-ensemble)");
}

const std::vector<ModelKind>& all_model_kinds() {
  static const std::vector<ModelKind> kinds{ModelKind::treeging, ModelKind::random_forest, ModelKind::kriging,
                                            ModelKind::kriging_ensemble};
  return kinds;
}

ModelConfig ModelConfig::defaults(ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  switch (kind) {
    case ModelKind::treeging: c.ensemble = treeging_defaults(); break;
    case ModelKind::random_forest: c.ensemble = random_forest_defaults(); break;
    case ModelKind::kriging:
    case ModelKind::kriging_ensemble: c.ensemble = kriging_ensemble_defaults(); break;
  }
  return c;
}

FittedModel::FittedModel(ModelKind kind, KrigingModel model, std::vector<std::string> covariate_names)
    : kind_(kind), impl_(std::move(model)), covariate_names_(std::move(covariate_names)) {}

FittedModel::FittedModel(ModelKind kind, EnsembleModel model, std::vector<std::string> covariate_names)
    : kind_(kind), impl_(std::move(model)), covariate_names_(std::move(covariate_names)) {}

Eigen::VectorXd FittedModel::predict(const Dataset& data, std::size_t jobs) const {
  if (data.covariate_names.size() == covariate_names_.size() && data.covariate_names != covariate_names_)
    fail(ErrorKind::schema, "covariate columns differ from those the model was fitted on");
  if (const auto* e = std::get_if<EnsembleModel>(&impl_)) return e->predict(data, jobs);
  return std::get<KrigingModel>(impl_).predict(data);
}

std::vector<std::string> FittedModel::warnings() const {
  if (const auto* e = std::get_if<EnsembleModel>(&impl_)) return e->warnings();
  return std::get<KrigingModel>(impl_).warnings;
}

FittedModel fit_model(const Dataset& data, const ModelConfig& config, std::size_t jobs) {
  switch (config.kind) {
    case ModelKind::kriging:
      return {config.kind, fit_kriging(data, config.kriging), data.covariate_names};
    case ModelKind::treeging:
      return {config.kind, fit_treeging(data, config.ensemble, jobs), data.covariate_names};
    case ModelKind::random_forest:
      return {config.kind, fit_random_forest(data, config.ensemble, jobs), data.covariate_names};
    case ModelKind::kriging_ensemble: {
      EnsembleConfig ec = config.ensemble;
      ec.kriging = config.kriging;
      return {config.kind, fit_kriging_ensemble(data, ec, jobs), data.covariate_names};
    }
  }
  fail(ErrorKind::config, "unknown model kind");
}

}  // namespace treeging

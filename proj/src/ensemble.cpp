#include "treeging/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "treeging/errors.hpp"
#include "treeging/parallel.hpp"

namespace treeging {

std::size_t EnsembleConfig::subsample_size(std::size_t n) const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * subsample_prop * (1.0 + 1e-12)));
}

void EnsembleConfig::validate(std::size_t n) const {
  if (n_learners < 1) fail(ErrorKind::config, "ensemble needs at least one learner");
  if (!(subsample_prop > 0.0 && subsample_prop <= 1.0))
    fail(ErrorKind::config, "subsample proportion must lie in (0, 1]");
  const std::size_t m = subsample_size(n);
  std::size_t minimum = 1;
  switch (base) {
    case BaseLearner::treege: minimum = std::max<std::size_t>(10, tree.min_node_size); break;
    case BaseLearner::tree: minimum = std::max<std::size_t>(1, tree.min_node_size); break;
    case BaseLearner::kriging: minimum = 2; break;
  }
  if (m < minimum)
    fail(ErrorKind::config, "subsample of " + std::to_string(m) + " rows is below the minimum of " +
                                std::to_string(minimum) + " for this base learner");
}

EnsembleConfig treeging_defaults() { return {}; }

EnsembleConfig random_forest_defaults() {
  EnsembleConfig c;
  c.base = BaseLearner::tree;
  c.sampling = Sampling::bootstrap;
  c.subsample_prop = 1.0;
  return c;
}

EnsembleConfig kriging_ensemble_defaults() {
  EnsembleConfig c;
  c.base = BaseLearner::kriging;
  return c;
}

std::vector<std::size_t> draw_subsample(std::size_t n, const EnsembleConfig& config, std::size_t t) {
  const std::size_t m = config.subsample_size(n);
  std::mt19937_64 rng(derive_seed(config.master_seed, t, 0));
  std::vector<std::size_t> rows;
  if (config.sampling == Sampling::without_replacement) {
    rows.resize(n);
    std::iota(rows.begin(), rows.end(), 0);
    for (std::size_t k = 0; k < m; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(rows[k], rows[pick(rng)]);
    }
    rows.resize(m);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    rows.reserve(m);
    for (std::size_t k = 0; k < m; ++k) rows.push_back(pick(rng));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::uint64_t learner_tree_seed(const EnsembleConfig& config, std::size_t t) {
  return derive_seed(config.master_seed, t, 1);
}

namespace {

double variance_of(const Eigen::VectorXd& e) {
  if (e.size() < 2) return 1.0;
  const double mean = e.mean();
  return (e.array() - mean).square().sum() / static_cast<double>(e.size() - 1);
}

bool is_covariance_failure(ErrorKind kind) {
  return kind == ErrorKind::empty_variogram || kind == ErrorKind::degenerate_variogram ||
         kind == ErrorKind::ill_conditioned || kind == ErrorKind::domain ||
         kind == ErrorKind::insufficient_data;
}

Learner fit_treege(const Dataset& sub, const EnsembleConfig& config, std::size_t t, Learner learner) {
  const Eigen::MatrixXd features = feature_matrix(sub);
  TreeConfig tc = config.tree;
  tc.seed = learner_tree_seed(config, t);
  learner.tree = fit_tree(features, sub.y, tc);
  if (config.base == BaseLearner::tree) return learner;

  const Eigen::VectorXd residuals = sub.y - learner.tree->predict(features);
  const auto nugget = CovarianceModel::pure_nugget(variance_of(residuals));
  if (config.force_pure_nugget) {
    learner.dependence = {nugget, sub.coords, {}};
    return learner;
  }
  try {
    auto cov = fit_covariance({residuals.data(), static_cast<std::size_t>(residuals.size())}, sub.coords,
                              config.variogram);
    learner.dependence = fit_dependence(std::move(cov), sub.coords, residuals, config.path);
  } catch (const Error& e) {
    if (!is_covariance_failure(e.kind())) throw;
    learner.warning = "learner " + std::to_string(t) + ": covariance fit failed (" + e.what() +
                      "); using pure-nugget covariance";
    learner.dependence = {nugget, sub.coords, {}};
  }
  return learner;
}

Learner fit_kriging_learner(const Dataset& sub, const EnsembleConfig& config, std::size_t t, Learner learner) {
  KrigingOptions options = config.kriging;
  options.variogram = config.variogram;
  options.path = config.path;
  if (config.force_pure_nugget) options.covariance = CovarianceModel::pure_nugget(1.0);
  try {
    learner.kriging = fit_kriging(sub, options);
  } catch (const Error& e) {
    if (!is_covariance_failure(e.kind()) || options.covariance) throw;
    learner.warning = "learner " + std::to_string(t) + ": covariance fit failed (" + e.what() +
                      "); using pure-nugget covariance";
    options.covariance = CovarianceModel::pure_nugget(1.0);
    learner.kriging = fit_kriging(sub, options);
  }
  return learner;
}

}  // namespace

Learner fit_learner(const Dataset& data, const EnsembleConfig& config, std::size_t t) {
  Learner learner;
  learner.subsample = draw_subsample(data.size(), config, t);
  const Dataset sub = data.subset(learner.subsample);
  if (config.base == BaseLearner::kriging) return fit_kriging_learner(sub, config, t, std::move(learner));
  return fit_treege(sub, config, t, std::move(learner));
}

Eigen::VectorXd Learner::predict(const Dataset& data) const {
  if (kriging) return kriging->predict(data);
  return predict(data, feature_matrix(data));
}

Eigen::VectorXd Learner::predict(const Dataset& data, const Eigen::MatrixXd& features) const {
  if (kriging) return kriging->predict(data);
  if (!tree) fail(ErrorKind::validation, "learner has neither a tree nor a kriging model");
  Eigen::VectorXd out = tree->predict(features);
  if (!dependence.vanishes()) out += dependence.evaluate(data.coords);
  return out;
}

Eigen::MatrixXd EnsembleModel::learner_predictions(const Dataset& data, std::size_t jobs) const {
  if (data.n_covariates() != n_covariates)
    fail(ErrorKind::shape, "model expects " + std::to_string(n_covariates) + " covariates, got " +
                               std::to_string(data.n_covariates()));
  if (data.size() > 0 && data.is_spacetime() != spacetime)
    fail(ErrorKind::shape, "coordinate dimensionality does not match the fitted model");
  const Eigen::MatrixXd features = config.base == BaseLearner::kriging ? Eigen::MatrixXd() : feature_matrix(data);
  Eigen::MatrixXd preds(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(learners.size()));
  parallel_for(learners.size(), jobs, [&](std::size_t t) {
    preds.col(static_cast<Eigen::Index>(t)) = learners[t].predict(data, features);
  });
  return preds;
}

Eigen::VectorXd EnsembleModel::predict(const Dataset& data, std::size_t jobs) const {
  if (learners.empty()) fail(ErrorKind::validation, "ensemble has no learners");
  const Eigen::MatrixXd preds = learner_predictions(data, jobs);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(preds.rows());
  for (Eigen::Index t = 0; t < preds.cols(); ++t) sum += preds.col(t);
  return sum / static_cast<double>(preds.cols());
}

std::vector<std::string> EnsembleModel::warnings() const {
  std::vector<std::string> out;
  for (const auto& l : learners) {
    if (l.warning) out.push_back(*l.warning);
    if (l.kriging)
      for (const auto& w : l.kriging->warnings) out.push_back(w);
  }
  return out;
}

EnsembleModel fit_ensemble(const Dataset& data, const EnsembleConfig& config, std::size_t jobs) {
  data.validate();
  config.validate(data.size());
  EnsembleModel model;
  model.config = config;
  model.n_covariates = data.n_covariates();
  model.spacetime = data.is_spacetime();
  model.learners.resize(config.n_learners);
  parallel_for(config.n_learners, jobs, [&](std::size_t t) { model.learners[t] = fit_learner(data, config, t); });
  return model;
}

EnsembleModel fit_treeging(const Dataset& data, EnsembleConfig config, std::size_t jobs) {
  config.base = BaseLearner::treege;
  return fit_ensemble(data, config, jobs);
}

EnsembleModel fit_random_forest(const Dataset& data, EnsembleConfig config, std::size_t jobs) {
  config.base = BaseLearner::tree;
  return fit_ensemble(data, config, jobs);
}

EnsembleModel fit_kriging_ensemble(const Dataset& data, EnsembleConfig config, std::size_t jobs) {
  config.base = BaseLearner::kriging;
  return fit_ensemble(data, config, jobs);
}

Eigen::VectorXd predict_treeging(const EnsembleModel& model, const Dataset& data, std::size_t jobs) {
  return model.predict(data, jobs);
}

}  // namespace treeging

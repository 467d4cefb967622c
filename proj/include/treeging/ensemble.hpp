#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treeging/covariance.hpp"
#include "treeging/data.hpp"
#include "treeging/kriging.hpp"
#include "treeging/tree.hpp"

namespace treeging {

enum class BaseLearner { treege, tree, kriging };
enum class Sampling { without_replacement, bootstrap };

struct EnsembleConfig {
  std::size_t n_learners = 50;
  double subsample_prop = 0.632;
  Sampling sampling = Sampling::without_replacement;
  BaseLearner base = BaseLearner::treege;
  TreeConfig tree;
  std::uint64_t master_seed = 0;
  // Replace every fitted covariance with an independent (pure-nugget) model.
  bool force_pure_nugget = false;
  VariogramOptions variogram;
  KrigingOptions kriging;  // kriging base learners
  SolvePath path = SolvePath::automatic;

  // floor(n * p) rows per learner.
  std::size_t subsample_size(std::size_t n) const;
  void validate(std::size_t n) const;
};

// Defaults for each ensemble: T = 50 throughout; treeging and the
// kriging ensemble subsample p = 0.632 without replacement; the random forest
// draws bootstrap samples of size n.
EnsembleConfig treeging_defaults();
EnsembleConfig random_forest_defaults();
EnsembleConfig kriging_ensemble_defaults();

// Rows used by learner `t`: a pure function of (config.master_seed, t).
// Without-replacement draws are returned sorted.
std::vector<std::size_t> draw_subsample(std::size_t n, const EnsembleConfig& config, std::size_t t);

// Tree seed for learner `t` (independent sub-stream of the master seed).
std::uint64_t learner_tree_seed(const EnsembleConfig& config, std::size_t t);

// One base learner. Treeges hold a tree plus the dependence term over their
// subsample; forest trees hold only the tree; kriging learners hold a model.
struct Learner {
  std::vector<std::size_t> subsample;
  std::optional<RegressionTree> tree;
  DependenceTerm dependence;  // treege only
  std::optional<KrigingModel> kriging;
  std::optional<std::string> warning;

  Eigen::VectorXd predict(const Dataset& data) const;
  // `features` must be feature_matrix(data); lets callers share it.
  Eigen::VectorXd predict(const Dataset& data, const Eigen::MatrixXd& features) const;
};

struct EnsembleModel {
  EnsembleConfig config;
  std::vector<Learner> learners;
  std::size_t n_covariates = 0;
  bool spacetime = false;

  // Arithmetic mean of the learner predictions.
  Eigen::VectorXd predict(const Dataset& data, std::size_t jobs = 1) const;
  // Column t holds learner t's predictions.
  Eigen::MatrixXd learner_predictions(const Dataset& data, std::size_t jobs = 1) const;
  std::vector<std::string> warnings() const;
};

// Fits one learner on the given rows of `data`.
Learner fit_learner(const Dataset& data, const EnsembleConfig& config, std::size_t t);

// Shared subsampling/averaging engine. Learners are fitted independently on up
// to `jobs` threads; the result does not depend on `jobs`.
EnsembleModel fit_ensemble(const Dataset& data, const EnsembleConfig& config, std::size_t jobs = 1);

EnsembleModel fit_treeging(const Dataset& data, EnsembleConfig config, std::size_t jobs = 1);
EnsembleModel fit_random_forest(const Dataset& data, EnsembleConfig config, std::size_t jobs = 1);
EnsembleModel fit_kriging_ensemble(const Dataset& data, EnsembleConfig config, std::size_t jobs = 1);

Eigen::VectorXd predict_treeging(const EnsembleModel& model, const Dataset& data, std::size_t jobs = 1);

}  // namespace treeging

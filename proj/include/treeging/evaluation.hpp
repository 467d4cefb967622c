#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "treeging/data.hpp"
#include "treeging/models.hpp"
#include "treeging/simulation.hpp"

namespace treeging {

// 1 - sum (y - y_hat)^2 / sum (y - mean(y))^2. Negative when the prediction
// is worse than the evaluation-set mean.
double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

enum class FoldMode { row, location };

std::string_view to_string(FoldMode mode);
FoldMode parse_fold_mode(std::string_view name);

struct FoldPlan {
  FoldMode mode = FoldMode::row;
  std::size_t k = 10;
  std::vector<std::size_t> assignments;  // fold of each row
  std::uint64_t seed = 0;

  std::vector<std::size_t> rows_in(std::size_t fold) const;
  std::vector<std::size_t> rows_outside(std::size_t fold) const;
};

// Balanced random partition of rows, or of distinct (s1, s2) locations with
// all rows at a location sharing a fold.
FoldPlan make_folds(const Dataset& data, FoldMode mode, std::size_t k, std::uint64_t seed);

// Fits on `train` and returns predictions at `test`.
using FitPredict = std::function<Eigen::VectorXd(const Dataset& train, const Dataset& test)>;

FitPredict model_runner(const ModelConfig& config, std::size_t jobs = 1);

struct EvalReport {
  std::string model_name;
  double r2 = 0.0;  // mean of the successful folds
  std::vector<std::optional<double>> per_fold_r2;
  double runtime_seconds = 0.0;
  std::vector<std::string> warnings;
  std::string config;
};

// Folds whose fit or scoring fails are left empty and excluded from the mean;
// if every fold fails the first error is rethrown.
EvalReport cross_validate(const Dataset& data, const FitPredict& model, const FoldPlan& plan,
                          std::string model_name = {});

using SimSpec = std::variant<SpatialSimSpec, SpaceTimeSimSpec>;

SimulatedField simulate(const SimSpec& spec);

enum class BatteryTarget { realized, mean };

struct BatteryOptions {
  std::size_t jobs = 1;
  // Score against the simulated draw at the test points, or against mu_Y.
  BatteryTarget target = BatteryTarget::realized;
  std::size_t correlation_k = 5;
  std::uint64_t model_seed = 0;
};

struct BatteryRow {
  std::string family;  // spatial or spacetime
  Scenario scenario = Scenario::i;
  double eta = 0.0;
  double spatial_range = 0.0;  // nu for spatial fields
  std::optional<double> temporal_range;
  std::uint64_t seed = 0;
  double mean_correlation = 0.0;
  std::string model;
  std::optional<double> r2;
  double runtime_seconds = 0.0;
  std::string status = "ok";  // error kind when the cell failed
};

// Simulates every spec once and scores every model on it. Cells run on up to
// `jobs` threads; models within a cell run sequentially. Each model's seed is
// derived from the cell seed, so rows do not depend on `jobs`. Rows are
// ordered spec-major.
std::vector<BatteryRow> run_battery(const std::vector<SimSpec>& specs, const std::vector<ModelConfig>& models,
                                    const BatteryOptions& options = {});

// Columns: family,scenario,eta,nu,temporal_range,seed,mean_correlation,model,r2
// then runtime_seconds (only when requested) and status.
void write_battery_csv(const std::vector<BatteryRow>& rows, std::ostream& out, bool include_runtime = false);

enum class SweepParam { n_learners, subsample_prop };

std::string_view to_string(SweepParam p);
SweepParam parse_sweep_param(std::string_view name);

struct SweepRow {
  std::string param;
  double value = 0.0;
  std::size_t replicate = 0;
  std::optional<double> r2;
  std::string status = "ok";
};

// Applies one sweep value to a config (n_learners or subsample_prop).
ModelConfig with_sweep_value(ModelConfig config, SweepParam param, double value);

// Scores each value on each simulated replicate against its test truth.
std::vector<SweepRow> tuning_sweep(const std::vector<SimSpec>& replicates, SweepParam param,
                                   const std::vector<double>& values, const ModelConfig& base,
                                   const BatteryOptions& options = {});

// Scores each value by cross-validation on one dataset.
std::vector<SweepRow> tuning_sweep(const Dataset& data, const FoldPlan& plan, SweepParam param,
                                   const std::vector<double>& values, const ModelConfig& base,
                                   std::size_t jobs = 1);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

struct ModelSummary {
  std::string model;
  std::size_t n = 0;       // scored rows
  std::size_t failed = 0;  // rows without an r2
  double mean = 0.0;
  double median = 0.0;
};

// Per-model mean and median of the r2 column of a result table (first
// appearance order of the `model` column; sweep tables group by value).
std::vector<ModelSummary> summarize_table(std::istream& in);
void write_summary(const std::vector<ModelSummary>& summary, std::ostream& out);

}  // namespace treeging

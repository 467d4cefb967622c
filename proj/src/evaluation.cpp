#include "treeging/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "treeging/errors.hpp"
#include "treeging/parallel.hpp"

namespace treeging {

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size())
    fail(ErrorKind::shape, "r2 needs equal lengths, got " + std::to_string(y.size()) + " and " +
                               std::to_string(y_hat.size()));
  if (y.size() < 2) fail(ErrorKind::insufficient_data, "r2 needs at least two observations");
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  if (!(ss_tot > 0.0)) fail(ErrorKind::domain, "r2 is undefined for a constant response");
  return 1.0 - (y - y_hat).squaredNorm() / ss_tot;
}

std::string_view to_string(FoldMode mode) { return mode == FoldMode::row ? "row" : "location"; }

FoldMode parse_fold_mode(std::string_view name) {
  if (name == "row") return FoldMode::row;
  if (name == "location") return FoldMode::location;
  fail(ErrorKind::config, "unknown fold mode '" + std::string(name) + "' (expected row or location)");
}

std::vector<std::size_t> FoldPlan::rows_in(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::rows_outside(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

FoldPlan make_folds(const Dataset& data, FoldMode mode, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::config, "cross-validation needs k >= 2");
  FoldPlan plan{mode, k, std::vector<std::size_t>(data.size()), seed};
  std::mt19937_64 rng(derive_seed(seed, 0));

  // unit_of[i]: the partitioned entity (row or location) of row i.
  std::vector<std::size_t> unit_of(data.size());
  std::size_t n_units = data.size();
  if (mode == FoldMode::row) {
    std::iota(unit_of.begin(), unit_of.end(), 0);
  } else {
    std::map<std::pair<double, double>, std::size_t> ids;
    for (const auto& c : data.coords) ids.emplace(std::make_pair(c.s1, c.s2), 0);
    std::size_t next = 0;
    for (auto& [loc, id] : ids) id = next++;
    for (std::size_t i = 0; i < data.size(); ++i) unit_of[i] = ids.at({data.coords[i].s1, data.coords[i].s2});
    n_units = ids.size();
  }
  if (n_units < k)
    fail(ErrorKind::config, "cannot split " + std::to_string(n_units) + " " +
                                (mode == FoldMode::row ? "rows" : "locations") + " into " + std::to_string(k) +
                                " folds");

  std::vector<std::size_t> order(n_units);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold_of_unit(n_units);
  for (std::size_t p = 0; p < n_units; ++p) fold_of_unit[order[p]] = p % k;
  for (std::size_t i = 0; i < data.size(); ++i) plan.assignments[i] = fold_of_unit[unit_of[i]];
  return plan;
}

FitPredict model_runner(const ModelConfig& config, std::size_t jobs) {
  return [config, jobs](const Dataset& train, const Dataset& test) {
    return fit_model(train, config, jobs).predict(test, jobs);
  };
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

EvalReport cross_validate(const Dataset& data, const FitPredict& model, const FoldPlan& plan, std::string model_name) {
  if (plan.assignments.size() != data.size()) fail(ErrorKind::shape, "fold plan does not match the data");
  const auto start = std::chrono::steady_clock::now();
  EvalReport report;
  report.model_name = std::move(model_name);
  std::optional<Error> first_error;
  double sum = 0.0;
  std::size_t ok = 0;
  for (std::size_t f = 0; f < plan.k; ++f) {
    try {
      const auto test_rows = plan.rows_in(f);
      if (test_rows.empty()) fail(ErrorKind::insufficient_data, "fold is empty");
      const Dataset train = data.subset(plan.rows_outside(f));
      const Dataset test = data.subset(test_rows);
      const double r2 = r_squared(test.y, model(train, test));
      report.per_fold_r2.emplace_back(r2);
      sum += r2;
      ++ok;
    } catch (const Error& e) {
      report.per_fold_r2.emplace_back(std::nullopt);
      report.warnings.push_back("fold " + std::to_string(f) + " failed (" + std::string(to_string(e.kind())) +
                                "): " + e.what());
      if (!first_error) first_error = e;
    }
  }
  if (ok == 0) throw *first_error;
  report.r2 = sum / static_cast<double>(ok);
  report.runtime_seconds = seconds_since(start);
  return report;
}

SimulatedField simulate(const SimSpec& spec) {
  return std::visit([](const auto& s) {
    if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SpatialSimSpec>) return simulate_spatial(s);
    else return simulate_spacetime(s);
  }, spec);
}

namespace {

std::uint64_t spec_seed(const SimSpec& spec) {
  return std::visit([](const auto& s) { return s.seed; }, spec);
}

double score(const SimulatedField& field, const Eigen::VectorXd& pred, BatteryTarget target) {
  return r_squared(target == BatteryTarget::realized ? field.test.y : field.test_mean, pred);
}

BatteryRow row_template(const SimSpec& spec) {
  BatteryRow row;
  std::visit([&row](const auto& s) {
    row.scenario = s.scenario;
    row.eta = s.eta;
    row.seed = s.seed;
    if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SpatialSimSpec>) {
      row.family = "spatial";
      row.spatial_range = s.nu;
    } else {
      row.family = "spacetime";
      row.spatial_range = s.spatial_range;
      row.temporal_range = s.temporal_range;
    }
  }, spec);
  return row;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

std::vector<BatteryRow> run_battery(const std::vector<SimSpec>& specs, const std::vector<ModelConfig>& models,
                                    const BatteryOptions& options) {
  if (specs.empty() || models.empty()) fail(ErrorKind::config, "battery needs at least one spec and one model");
  std::vector<std::vector<BatteryRow>> cells(specs.size());
  parallel_for(specs.size(), options.jobs, [&](std::size_t c) {
    BatteryRow base = row_template(specs[c]);
    auto& rows = cells[c];
    std::optional<SimulatedField> field;
    std::string sim_error;
    try {
      field = simulate(specs[c]);
    } catch (const Error& e) {
      sim_error = std::string(to_string(e.kind()));
    }
    if (field && !field->test.coords.empty())
      base.mean_correlation = mean_correlation(*field, std::min(options.correlation_k, field->train.size())).mean;
    for (std::size_t m = 0; m < models.size(); ++m) {
      BatteryRow row = base;
      row.model = std::string(to_string(models[m].kind));
      if (!field) {
        row.status = sim_error;
        rows.push_back(std::move(row));
        continue;
      }
      ModelConfig config = models[m];
      config.ensemble.master_seed = derive_seed(spec_seed(specs[c]), 1000 + m, options.model_seed);
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto pred = fit_model(field->train, config, 1).predict(field->test, 1);
        row.r2 = score(*field, pred, options.target);
      } catch (const Error& e) {
        row.status = std::string(to_string(e.kind()));
      }
      row.runtime_seconds = seconds_since(start);
      rows.push_back(std::move(row));
    }
  });
  std::vector<BatteryRow> out;
  for (auto& c : cells)
    for (auto& r : c) out.push_back(std::move(r));
  return out;
}

void write_battery_csv(const std::vector<BatteryRow>& rows, std::ostream& out, bool include_runtime) {
  out << "family,scenario,eta,nu,temporal_range,seed,mean_correlation,model,r2";
  if (include_runtime) out << ",runtime_seconds";
  out << ",status\n";
  for (const auto& r : rows) {
    out << r.family << ',' << to_string(r.scenario) << ',' << fmt(r.eta) << ',' << fmt(r.spatial_range) << ','
        << (r.temporal_range ? fmt(*r.temporal_range) : "") << ',' << r.seed << ',' << fmt(r.mean_correlation) << ','
        << r.model << ',' << (r.r2 ? fmt(*r.r2) : "");
    if (include_runtime) out << ',' << fmt(r.runtime_seconds);
    out << ',' << r.status << '\n';
  }
}

std::string_view to_string(SweepParam p) { return p == SweepParam::n_learners ? "n_learners" : "subsample_prop"; }

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "n_learners" || name == "T") return SweepParam::n_learners;
  if (name == "subsample_prop" || name == "p") return SweepParam::subsample_prop;
  fail(ErrorKind::config, "unknown sweep parameter '" + std::string(name) + "' (expected n_learners or subsample_prop)");
}

ModelConfig with_sweep_value(ModelConfig config, SweepParam param, double value) {
  if (param == SweepParam::n_learners) {
    if (!(value >= 1.0) || value != std::floor(value))
      fail(ErrorKind::config, "n_learners values must be positive integers, got " + fmt(value));
    config.ensemble.n_learners = static_cast<std::size_t>(value);
  } else {
    if (!(value > 0.0 && value <= 1.0)) fail(ErrorKind::config, "subsample_prop values must lie in (0, 1]");
    config.ensemble.subsample_prop = value;
  }
  return config;
}

namespace {

void check_values(SweepParam param, const std::vector<double>& values) {
  if (values.empty()) fail(ErrorKind::config, "sweep needs at least one value");
  for (double v : values) with_sweep_value(ModelConfig{}, param, v);
}

}  // namespace

std::vector<SweepRow> tuning_sweep(const std::vector<SimSpec>& replicates, SweepParam param,
                                   const std::vector<double>& values, const ModelConfig& base,
                                   const BatteryOptions& options) {
  check_values(param, values);
  if (replicates.empty()) fail(ErrorKind::config, "sweep needs at least one replicate");
  std::vector<std::vector<SweepRow>> cells(replicates.size());
  parallel_for(replicates.size(), options.jobs, [&](std::size_t r) {
    std::optional<SimulatedField> field;
    std::string sim_error;
    try {
      field = simulate(replicates[r]);
    } catch (const Error& e) {
      sim_error = std::string(to_string(e.kind()));
    }
    for (double v : values) {
      SweepRow row{std::string(to_string(param)), v, r, std::nullopt, "ok"};
      if (!field) {
        row.status = sim_error;
      } else {
        ModelConfig config = with_sweep_value(base, param, v);
        config.ensemble.master_seed = derive_seed(spec_seed(replicates[r]), 2000, options.model_seed);
        try {
          row.r2 = score(*field, fit_model(field->train, config, 1).predict(field->test, 1), options.target);
        } catch (const Error& e) {
          row.status = std::string(to_string(e.kind()));
        }
      }
      cells[r].push_back(std::move(row));
    }
  });
  // value-major order
  std::vector<SweepRow> out;
  for (std::size_t v = 0; v < values.size(); ++v)
    for (auto& c : cells) out.push_back(std::move(c[v]));
  return out;
}

std::vector<SweepRow> tuning_sweep(const Dataset& data, const FoldPlan& plan, SweepParam param,
                                   const std::vector<double>& values, const ModelConfig& base, std::size_t jobs) {
  check_values(param, values);
  std::vector<SweepRow> out;
  for (double v : values) {
    SweepRow row{std::string(to_string(param)), v, 0, std::nullopt, "ok"};
    try {
      row.r2 = cross_validate(data, model_runner(with_sweep_value(base, param, v), jobs), plan).r2;
    } catch (const Error& e) {
      row.status = std::string(to_string(e.kind()));
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "param,value,replicate,r2,status\n";
  for (const auto& r : rows)
    out << r.param << ',' << fmt(r.value) << ',' << r.replicate << ',' << (r.r2 ? fmt(*r.r2) : "") << ','
        << r.status << '\n';
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<ModelSummary> summarize_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::schema, "result table is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);
  const auto find = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  const auto r2_col = find("r2");
  if (!r2_col) fail(ErrorKind::schema, "result table has no r2 column");
  const auto model_col = find("model");
  const auto value_col = find("value");
  const auto param_col = find("param");
  if (!model_col && !value_col) fail(ErrorKind::schema, "result table has neither a model nor a value column");

  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> scores;
  std::map<std::string, std::size_t> failures;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                 " fields, got " + std::to_string(cells.size()));
    std::string key = model_col ? cells[*model_col]
                                : (param_col ? cells[*param_col] + "=" : std::string("value=")) + cells[*value_col];
    if (!scores.count(key)) {
      order.push_back(key);
      scores[key];
    }
    const auto& cell = cells[*r2_col];
    if (cell.empty()) {
      ++failures[key];
      continue;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      scores[key].push_back(v);
    } catch (const std::exception&) {
      fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": r2 value '" + cell + "' is not a number");
    }
  }
  std::vector<ModelSummary> out;
  for (const auto& key : order) {
    auto v = scores[key];
    ModelSummary s{key, v.size(), failures[key], 0.0, 0.0};
    if (!v.empty()) {
      s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      std::sort(v.begin(), v.end());
      const std::size_t h = v.size() / 2;
      s.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary(const std::vector<ModelSummary>& summary, std::ostream& out) {
  out << "model,n,failed,mean_r2,median_r2\n";
  for (const auto& s : summary)
    out << s.model << ',' << s.n << ',' << s.failed << ',' << (s.n ? fmt(s.mean) : "") << ','
        << (s.n ? fmt(s.median) : "") << '\n';
}

}  // namespace treeging

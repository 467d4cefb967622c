// treeging command-line front end: simulate, fit, predict, crossval, battery,
// sweep and summary.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treeging/errors.hpp"
#include "treeging/evaluation.hpp"
#include "treeging/models.hpp"
#include "treeging/parallel.hpp"
#include "treeging/simulation.hpp"

namespace fs = std::filesystem;
using namespace treeging;

namespace {

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(s);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Reads a flat key=value file; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config file '" + path.string() + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::config, path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    auto key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

// Appends config-file entries as --key=value unless the flag was given on
// the command line, so flags always win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (!config_path) return args;
  const auto given = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  for (const auto& [key, value] : read_config_file(*config_path))
    if (!given(key)) args.push_back("--" + key + "=" + value);
  return args;
}

// Column mapping for an input CSV. Coordinates default to s1,s2 (plus t when
// the header has it); covariates default to every other non-response column.
struct SchemaFlags {
  std::string coords;
  std::string response = "y";
  std::string covariates;

  void add(CLI::App* app) {
    app->add_option("--coords", coords, "coordinate columns, e.g. s1,s2 or s1,s2,t");
    app->add_option("--response", response, "response column")->capture_default_str();
    app->add_option("--covariates", covariates, "covariate columns (default: all remaining columns)");
  }

  CsvSchema resolve(const fs::path& csv, std::optional<std::vector<std::string>> fixed_covariates = {},
                    std::optional<bool> spacetime = {}) const {
    std::ifstream in(csv);
    if (!in) fail(ErrorKind::io, "cannot open '" + csv.string() + "' for reading");
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    const auto has = [&](const std::string& c) { return std::find(header.begin(), header.end(), c) != header.end(); };

    CsvSchema s;
    if (!coords.empty()) s.coordinates = split(coords);
    else if (spacetime.value_or(has("t"))) s.coordinates = {"s1", "s2", "t"};
    s.response = response;
    if (fixed_covariates) {
      s.covariates = *fixed_covariates;
    } else if (!covariates.empty()) {
      s.covariates = split(covariates);
    } else {
      for (const auto& c : header)
        if (c != s.response && std::find(s.coordinates.begin(), s.coordinates.end(), c) == s.coordinates.end())
          s.covariates.push_back(c);
    }
    return s;
  }
};

struct ModelFlags {
  std::optional<std::size_t> n_learners;
  std::optional<double> subsample_prop;
  std::optional<std::string> sampling;
  std::optional<std::size_t> min_node_size;
  std::optional<std::size_t> max_depth;
  std::optional<std::size_t> mtry;
  std::optional<std::size_t> n_bins;
  std::optional<double> max_dist_fraction;
  std::string solver = "auto";
  bool pure_nugget = false;

  void add(CLI::App* app) {
    app->add_option("--n-learners", n_learners, "number of base learners T (default 50)");
    app->add_option("--subsample-prop", subsample_prop, "subsample proportion p (default 0.632; rf 1.0)");
    app->add_option("--sampling", sampling, "without-replacement or bootstrap")
        ->check(CLI::IsMember({"without-replacement", "bootstrap"}));
    app->add_option("--min-node-size", min_node_size, "minimum rows per tree leaf (default 5)");
    app->add_option("--max-depth", max_depth, "maximum tree depth (default unlimited)");
    app->add_option("--mtry", mtry, "features tried per split (default ceil(q/3))");
    app->add_option("--n-bins", n_bins, "empirical variogram bins (default 15)");
    app->add_option("--max-dist-fraction", max_dist_fraction, "variogram cutoff as a fraction of the largest lag");
    app->add_option("--solver", solver, "covariance solver: auto, dense or sparse")
        ->check(CLI::IsMember({"auto", "dense", "sparse"}))
        ->capture_default_str();
    app->add_flag("--pure-nugget", pure_nugget, "treat residuals as independent (treeging only)");
  }

  ModelConfig config(ModelKind kind, std::uint64_t seed) const {
    ModelConfig c = ModelConfig::defaults(kind);
    auto& e = c.ensemble;
    e.master_seed = seed;
    if (n_learners) e.n_learners = *n_learners;
    if (subsample_prop) e.subsample_prop = *subsample_prop;
    if (sampling) e.sampling = *sampling == "bootstrap" ? Sampling::bootstrap : Sampling::without_replacement;
    if (min_node_size) e.tree.min_node_size = *min_node_size;
    if (max_depth) e.tree.max_depth = *max_depth;
    if (mtry) e.tree.mtry = *mtry;
    if (n_bins) e.variogram.n_bins = c.kriging.variogram.n_bins = *n_bins;
    if (max_dist_fraction) e.variogram.max_dist_fraction = c.kriging.variogram.max_dist_fraction = *max_dist_fraction;
    const SolvePath path = solver == "dense" ? SolvePath::dense : solver == "sparse" ? SolvePath::sparse
                                                                                    : SolvePath::automatic;
    e.path = c.kriging.path = path;
    e.force_pure_nugget = pure_nugget;
    return c;
  }
};

std::vector<ModelKind> parse_models(const std::string& list) {
  if (list == "all") return all_model_kinds();
  std::vector<ModelKind> out;
  for (const auto& name : split(list)) out.push_back(parse_model_kind(trim(name)));
  if (out.empty()) fail(ErrorKind::config, "no models given");
  return out;
}

// Output stream for a path, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }
  void close() {
    if (path_ == "-") {
      std::cout.flush();
      return;
    }
    file_.close();
    if (!file_) fail(ErrorKind::io, "write failed for '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

// Prints every option of the invoked command with its resolved value.
void echo_config(const CLI::App& app) {
  const CLI::App* cmd = &app;
  std::string path;
  for (;;) {
    const auto subs = cmd->get_subcommands();
    if (subs.empty()) break;
    cmd = subs.front();
    path += (path.empty() ? "" : " ") + cmd->get_name();
  }
  for (const auto* opt : cmd->get_options()) {
    const std::string key = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
    if (key == "help") continue;
    std::string value = opt->get_default_str();
    if (opt->count() > 0) {
      value.clear();
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    }
    std::cerr << "# " << path << ": " << key << '=' << value << '\n';
  }
}

void write_meta(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
  if (!out) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

fs::path output_dir(const std::string& dir) {
  const fs::path p(dir);
  if (!fs::is_directory(p)) fail(ErrorKind::io, "output directory '" + dir + "' does not exist");
  return p;
}

void save_field(const SimulatedField& field, const fs::path& dir, std::vector<std::pair<std::string, std::string>> meta) {
  save_csv(field.train, dir / "train.csv", default_schema(field.train));
  if (field.test.size() > 0) save_csv(field.test, dir / "test.csv", default_schema(field.test));
  meta.emplace_back("truth_covariance", field.truth_cov.describe());
  meta.emplace_back("covariates", join(field.train.covariate_names));
  if (field.interaction_pair)
    meta.emplace_back("interaction_pair", "X" + std::to_string(field.interaction_pair->first + 1) + ",X" +
                                              std::to_string(field.interaction_pair->second + 1));
  meta.emplace_back("train_rows", std::to_string(field.train.size()));
  meta.emplace_back("test_rows", std::to_string(field.test.size()));
  if (field.test.size() > 0 && field.train.size() >= 5)
    meta.emplace_back("mean_correlation", format_double(mean_correlation(field).mean));
  write_meta(dir / "meta.txt", meta);
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"treeging: ensembles of kriging-enriched regression trees for spatial prediction"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_file;
  app.add_option("--config", config_file, "flat key=value file of default flags (flags override it)");
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "master seed")->capture_default_str();
    sub->add_option("--jobs", jobs, "maximum parallel tasks")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--config", config_file, "flat key=value file of default flags");
  };

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate a random field and write train/test CSVs");
  simulate_cmd->require_subcommand(1);
  std::string out_dir = ".";
  std::string scenario_name = "i";
  SpatialSimSpec spatial_spec;
  auto* sim_spatial = simulate_cmd->add_subcommand("spatial", "spatial Gaussian-process field");
  add_common(sim_spatial);
  sim_spatial->add_option("--eta", spatial_spec.eta, "covariate effect multiplier")->capture_default_str();
  sim_spatial->add_option("--nu", spatial_spec.nu, "exponential range (0: independent noise)")->capture_default_str();
  sim_spatial->add_option("--n-train", spatial_spec.n_train, "training locations")->capture_default_str();
  sim_spatial->add_option("--grid-side", spatial_spec.grid_side, "test grid side")->capture_default_str();
  sim_spatial->add_option("--n-spurious", spatial_spec.n_spurious, "spurious covariates")->capture_default_str();
  sim_spatial->add_option("--scenario", scenario_name, "covariate scenario: i, ii, iii or iv")->capture_default_str();
  sim_spatial->add_option("--out", out_dir, "existing output directory")->capture_default_str();
  sim_spatial->add_flag("--defaults", "use the default sizes (the same as omitting size flags)");

  SpaceTimeSimSpec st_spec;
  std::string interaction;
  auto* sim_st = simulate_cmd->add_subcommand("spacetime", "space-time Gaussian-process field");
  add_common(sim_st);
  sim_st->add_option("--eta", st_spec.eta, "covariate effect multiplier")->capture_default_str();
  sim_st->add_option("--spatial-range", st_spec.spatial_range, "spatial exponential range")->capture_default_str();
  sim_st->add_option("--temporal-range", st_spec.temporal_range, "temporal exponential range")->capture_default_str();
  sim_st->add_option("--n-train-locs", st_spec.n_train_locs, "training locations")->capture_default_str();
  sim_st->add_option("--grid-side", st_spec.grid_side, "test grid side")->capture_default_str();
  sim_st->add_option("--n-times", st_spec.n_times, "time points")->capture_default_str();
  sim_st->add_option("--n-spurious", st_spec.n_spurious, "spurious covariates")->capture_default_str();
  sim_st->add_option("--interaction", interaction, "interaction covariates as i,j (1-based; default random)");
  sim_st->add_option("--scenario", scenario_name, "covariate scenario: i, ii, iii or iv")->capture_default_str();
  sim_st->add_option("--out", out_dir, "existing output directory")->capture_default_str();
  sim_st->add_flag("--defaults", "use the default sizes (the same as omitting size flags)");

  StandinSpec standin_spec;
  auto* sim_standin = simulate_cmd->add_subcommand("standin", "synthetic data shaped like the ozone case study");
  add_common(sim_standin);
  sim_standin->add_option("--locations", standin_spec.n_locations, "monitor locations")->capture_default_str();
  sim_standin->add_option("--days", standin_spec.n_days, "days observed")->capture_default_str();
  sim_standin->add_option("--out", out_dir, "existing output directory")->capture_default_str();

  // fit
  std::string model_name;
  std::string data_path;
  std::string out_path;
  SchemaFlags schema_flags;
  ModelFlags model_flags;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model and write its archive");
  add_common(fit_cmd);
  fit_cmd->add_option("model", model_name, "treeging, rf, kriging or kriging-ensemble")->required();
  fit_cmd->add_option("data", data_path, "training CSV")->required();
  fit_cmd->add_option("--out", out_path, "archive path")->default_str("model.json");
  schema_flags.add(fit_cmd);
  model_flags.add(fit_cmd);

  // predict
  std::string archive_path;
  auto* predict_cmd = app.add_subcommand("predict", "predict at new locations from a model archive");
  add_common(predict_cmd);
  predict_cmd->add_option("archive", archive_path, "model archive")->required();
  predict_cmd->add_option("data", data_path, "CSV of new locations and covariates")->required();
  predict_cmd->add_option("--out", out_path, "predictions CSV ('-' for stdout)")->default_str("-");
  predict_cmd->add_option("--coords", schema_flags.coords, "coordinate columns");

  // crossval
  std::string fold_mode = "row";
  std::size_t k_folds = 10;
  auto* cv_cmd = app.add_subcommand("crossval", "k-fold cross-validated r2");
  add_common(cv_cmd);
  cv_cmd->add_option("model", model_name, "treeging, rf, kriging or kriging-ensemble")->required();
  cv_cmd->add_option("data", data_path, "CSV")->required();
  cv_cmd->add_option("--mode", fold_mode, "row or location")->capture_default_str();
  cv_cmd->add_option("--k", k_folds, "number of folds")->capture_default_str();
  cv_cmd->add_option("--out", out_path, "per-fold CSV ('-' for stdout)")->default_str("-");
  schema_flags.add(cv_cmd);
  model_flags.add(cv_cmd);

  // battery
  std::string models_list = "all";
  bool full_grid = false;
  bool with_runtime = false;
  std::string target = "realized";
  std::size_t replicates = 1;
  std::vector<double> etas{1.0}, nus{0.5}, spatial_ranges{1.0}, temporal_ranges{5.0};
  auto* battery_cmd = app.add_subcommand("battery", "simulation battery: every spec x model");
  battery_cmd->require_subcommand(1);
  const auto add_battery_flags = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--models", models_list, "'all' or a comma list of models")->capture_default_str();
    sub->add_option("--scenario", scenario_name, "covariate scenario")->capture_default_str();
    sub->add_flag("--full-grid", full_grid, "run the full factorial grid");
    sub->add_option("--eta", etas, "effect multipliers")->delimiter(',');
    sub->add_option("--replicates", replicates, "seeds per grid cell")->capture_default_str();
    sub->add_option("--target", target, "score against the realized field or the mean surface")
        ->check(CLI::IsMember({"realized", "mean"}))
        ->capture_default_str();
    sub->add_flag("--runtime", with_runtime, "add a runtime_seconds column (not reproducible)");
    sub->add_option("--out", out_path, "result CSV ('-' for stdout)")->default_str("-");
    model_flags.add(sub);
  };
  auto* battery_spatial = battery_cmd->add_subcommand("spatial", "spatial battery");
  add_battery_flags(battery_spatial);
  battery_spatial->add_option("--nu", nus, "exponential ranges")->delimiter(',');
  auto* battery_st = battery_cmd->add_subcommand("spacetime", "space-time battery");
  add_battery_flags(battery_st);
  battery_st->add_option("--spatial-range", spatial_ranges, "spatial ranges")->delimiter(',');
  battery_st->add_option("--temporal-range", temporal_ranges,
                         "temporal ranges (with --full-grid replaces the default 0,2.5,5,7.5,10)")
      ->delimiter(',');

  // sweep
  std::string sweep_param = "n_learners";
  std::vector<double> sweep_values;
  double sweep_eta = 1.0, sweep_nu = 0.5;
  auto* sweep_cmd = app.add_subcommand("sweep", "tuning sweep over n_learners or subsample_prop");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--param", sweep_param, "n_learners or subsample_prop")->capture_default_str();
  sweep_cmd->add_option("--values", sweep_values, "values to try")->delimiter(',')->required();
  std::string sweep_model = "treeging";
  sweep_cmd->add_option("--model", sweep_model, "model to tune")->capture_default_str();
  sweep_cmd->add_option("--data", data_path, "score by cross-validation on this CSV instead of simulating");
  sweep_cmd->add_option("--mode", fold_mode, "fold mode with --data")->capture_default_str();
  sweep_cmd->add_option("--k", k_folds, "folds with --data")->capture_default_str();
  sweep_cmd->add_option("--eta", sweep_eta, "simulated effect multiplier")->capture_default_str();
  sweep_cmd->add_option("--nu", sweep_nu, "simulated exponential range")->capture_default_str();
  sweep_cmd->add_option("--scenario", scenario_name, "simulated covariate scenario")->capture_default_str();
  sweep_cmd->add_option("--replicates", replicates, "simulated replicates")->capture_default_str();
  sweep_cmd->add_option("--out", out_path, "result CSV ('-' for stdout)")->default_str("-");
  schema_flags.add(sweep_cmd);
  model_flags.add(sweep_cmd);

  // summary
  std::string table_path;
  auto* summary_cmd = app.add_subcommand("summary", "per-model mean and median r2 of a result table");
  summary_cmd->add_option("table", table_path, "battery or sweep CSV")->required();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  }

  try {
    echo_config(app);
    if (out_path.empty()) out_path = fit_cmd->parsed() ? "model.json" : "-";

    if (sim_spatial->parsed()) {
      const auto dir = output_dir(out_dir);
      spatial_spec.scenario = parse_scenario(scenario_name);
      spatial_spec.seed = seed;
      const auto field = simulate_spatial(spatial_spec);
      save_field(field, dir,
                 {{"family", "spatial"}, {"eta", fmt(spatial_spec.eta)}, {"nu", fmt(spatial_spec.nu)},
                  {"n_train", std::to_string(spatial_spec.n_train)}, {"grid_side", std::to_string(spatial_spec.grid_side)},
                  {"scenario", scenario_name}, {"seed", std::to_string(seed)}});
    } else if (sim_st->parsed()) {
      const auto dir = output_dir(out_dir);
      st_spec.scenario = parse_scenario(scenario_name);
      st_spec.seed = seed;
      if (!interaction.empty()) {
        const auto parts = split(interaction);
        if (parts.size() != 2) fail(ErrorKind::config, "--interaction takes two indices i,j");
        st_spec.interaction_pair = std::make_pair(std::stoul(parts[0]) - 1, std::stoul(parts[1]) - 1);
      }
      const auto field = simulate_spacetime(st_spec);
      save_field(field, dir,
                 {{"family", "spacetime"}, {"eta", fmt(st_spec.eta)}, {"spatial_range", fmt(st_spec.spatial_range)},
                  {"temporal_range", fmt(st_spec.temporal_range)}, {"n_train_locs", std::to_string(st_spec.n_train_locs)},
                  {"grid_side", std::to_string(st_spec.grid_side)}, {"n_times", std::to_string(st_spec.n_times)},
                  {"scenario", scenario_name}, {"seed", std::to_string(seed)}});
    } else if (sim_standin->parsed()) {
      const auto dir = output_dir(out_dir);
      standin_spec.seed = seed;
      const auto data = simulate_standin(standin_spec);
      const auto schema = standin_schema();
      save_csv(data, dir / "standin.csv", schema);
      write_meta(dir / "meta.txt", {{"family", "standin"}, {"locations", std::to_string(standin_spec.n_locations)},
                                    {"days", std::to_string(standin_spec.n_days)}, {"seed", std::to_string(seed)},
                                    {"coords", join(schema.coordinates)}, {"response", schema.response},
                                    {"rows", std::to_string(data.size())}});
    } else if (fit_cmd->parsed()) {
      const auto kind = parse_model_kind(model_name);
      const auto data = load_csv(data_path, schema_flags.resolve(data_path));
      const auto model = fit_model(data, model_flags.config(kind, seed), jobs);
      print_warnings(model.warnings());
      save_model(model, out_path);
    } else if (predict_cmd->parsed()) {
      const auto model = load_model(archive_path);
      const bool spacetime = model.is_ensemble() ? model.ensemble().spacetime : model.kriging().design.spacetime;
      auto schema = schema_flags.resolve(data_path, model.covariate_names(), spacetime);
      schema.response_required = false;
      const auto data = load_csv(data_path, schema);
      const auto pred = model.predict(data, jobs);
      Output out(out_path);
      out.stream() << "row,y_hat\n";
      for (Eigen::Index i = 0; i < pred.size(); ++i) out.stream() << i << ',' << fmt(pred(i)) << '\n';
      out.close();
    } else if (cv_cmd->parsed()) {
      const auto kind = parse_model_kind(model_name);
      const auto data = load_csv(data_path, schema_flags.resolve(data_path));
      const auto plan = make_folds(data, parse_fold_mode(fold_mode), k_folds, seed);
      const auto report =
          cross_validate(data, model_runner(model_flags.config(kind, seed), jobs), plan, model_name);
      print_warnings(report.warnings);
      std::cerr << "# crossval runtime_seconds=" << report.runtime_seconds << '\n';
      Output out(out_path);
      out.stream() << "fold,n_test,r2\n";
      for (std::size_t f = 0; f < plan.k; ++f)
        out.stream() << f << ',' << plan.rows_in(f).size() << ','
                     << (report.per_fold_r2[f] ? fmt(*report.per_fold_r2[f]) : "") << '\n';
      out.stream() << "mean," << data.size() << ',' << fmt(report.r2) << '\n';
      out.close();
    } else if (battery_spatial->parsed() || battery_st->parsed()) {
      const auto scenario = parse_scenario(scenario_name);
      std::vector<SimSpec> specs;
      if (battery_spatial->parsed()) {
        const auto eta_grid = full_grid ? spatial_eta_grid() : etas;
        const auto nu_grid = full_grid ? spatial_nu_grid() : nus;
        for (double eta : eta_grid)
          for (double nu : nu_grid)
            for (std::size_t r = 0; r < replicates; ++r) {
              SpatialSimSpec s;
              s.eta = eta;
              s.nu = nu;
              s.scenario = scenario;
              s.seed = derive_seed(seed, specs.size());
              specs.emplace_back(std::move(s));
            }
      } else {
        const auto eta_grid = full_grid ? spacetime_eta_grid() : etas;
        const auto rs_grid = full_grid ? spacetime_spatial_ranges() : spatial_ranges;
        const bool temporal_given = battery_st->count("--temporal-range") > 0;
        const auto rt_grid = full_grid && !temporal_given ? spacetime_temporal_ranges() : temporal_ranges;
        for (double eta : eta_grid)
          for (double rs : rs_grid)
            for (double rt : rt_grid)
              for (std::size_t r = 0; r < replicates; ++r) {
                SpaceTimeSimSpec s;
                s.eta = eta;
                s.spatial_range = rs;
                s.temporal_range = rt;
                s.scenario = scenario;
                s.seed = derive_seed(seed, specs.size());
                specs.emplace_back(s);
              }
      }
      std::vector<ModelConfig> models;
      for (auto kind : parse_models(models_list)) models.push_back(model_flags.config(kind, seed));
      BatteryOptions options;
      options.jobs = jobs;
      options.target = target == "mean" ? BatteryTarget::mean : BatteryTarget::realized;
      options.model_seed = seed;
      const auto rows = run_battery(specs, models, options);
      Output out(out_path);
      write_battery_csv(rows, out.stream(), with_runtime);
      out.close();
    } else if (sweep_cmd->parsed()) {
      const auto kind = parse_model_kind(sweep_model);
      const auto param = parse_sweep_param(sweep_param);
      const auto base = model_flags.config(kind, seed);
      std::vector<SweepRow> rows;
      if (!data_path.empty()) {
        const auto data = load_csv(data_path, schema_flags.resolve(data_path));
        const auto plan = make_folds(data, parse_fold_mode(fold_mode), k_folds, seed);
        rows = tuning_sweep(data, plan, param, sweep_values, base, jobs);
      } else {
        std::vector<SimSpec> reps;
        for (std::size_t r = 0; r < replicates; ++r) {
          SpatialSimSpec s;
          s.eta = sweep_eta;
          s.nu = sweep_nu;
          s.scenario = parse_scenario(scenario_name);
          s.seed = derive_seed(seed, r);
          reps.emplace_back(std::move(s));
        }
        BatteryOptions options;
        options.jobs = jobs;
        options.model_seed = seed;
        rows = tuning_sweep(reps, param, sweep_values, base, options);
      }
      Output out(out_path);
      write_sweep_csv(rows, out.stream());
      out.close();
    } else if (summary_cmd->parsed()) {
      std::ifstream in(table_path);
      if (!in) fail(ErrorKind::io, "cannot open '" + table_path + "' for reading");
      write_summary(summarize_table(in), std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

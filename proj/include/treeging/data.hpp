#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace treeging {

// A point of the index set: two spatial axes plus an optional time index.
struct Coordinate {
  double s1 = 0.0;
  double s2 = 0.0;
  std::optional<double> t;

  bool has_time() const noexcept { return t.has_value(); }
  friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

double spatial_distance(const Coordinate& a, const Coordinate& b) noexcept;
double temporal_distance(const Coordinate& a, const Coordinate& b) noexcept;

struct DistancePair {
  std::size_t i = 0;
  std::size_t j = 0;
  double h_spatial = 0.0;
  std::optional<double> h_temporal;
};

// Observed field: coordinates, n x q covariates and responses.
//
// Treated as immutable once validated; subsets are copies, so one Dataset can
// be shared by concurrently fitting learners.
struct Dataset {
  std::vector<Coordinate> coords;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> covariate_names;

  std::size_t size() const noexcept { return coords.size(); }
  std::size_t n_covariates() const noexcept { return static_cast<std::size_t>(X.cols()); }
  bool is_spacetime() const noexcept { return !coords.empty() && coords.front().has_time(); }

  // Throws validation/shape errors when an invariant is broken.
  void validate() const;

  Dataset subset(std::span<const std::size_t> rows) const;
};

// Tree/forest feature matrix: covariates followed by the coordinate columns
// (s1, s2 and t when present).
Eigen::MatrixXd feature_matrix(const Dataset& data);

// Explicit column mapping for CSV ingestion. Columns are never inferred.
struct CsvSchema {
  std::vector<std::string> coordinates{"s1", "s2"};  // 2 (space) or 3 (space-time)
  std::string response = "y";
  std::vector<std::string> covariates;
  // When false a missing response column yields y = 0 (prediction inputs).
  bool response_required = true;
};

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
Dataset read_csv(std::istream& in, const CsvSchema& schema,
                 const std::string& source = "<stream>");

// Writes coordinate columns, the response and covariates using the schema's
// column names; values are printed with round-trip precision.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const CsvSchema& schema);
void write_csv(const Dataset& data, std::ostream& out, const CsvSchema& schema);

// Schema matching the layout written by save_csv for this dataset with default
// names: s1,s2[,t],y plus the dataset's covariate names.
CsvSchema default_schema(const Dataset& data);

std::vector<DistancePair> pairwise_distances(std::span<const Coordinate> coords);

// Formats a double so that parsing it back yields the identical value.
std::string format_double(double v);

}  // namespace treeging

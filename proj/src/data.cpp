#include "treeging/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "treeging/errors.hpp"

namespace treeging {

double spatial_distance(const Coordinate& a, const Coordinate& b) noexcept {
  return std::hypot(a.s1 - b.s1, a.s2 - b.s2);
}

double temporal_distance(const Coordinate& a, const Coordinate& b) noexcept {
  if (!a.t || !b.t) return 0.0;
  return std::abs(*a.t - *b.t);
}

void Dataset::validate() const {
  const auto n = coords.size();
  if (n == 0) fail(ErrorKind::insufficient_data, "dataset has no rows");
  if (static_cast<std::size_t>(X.rows()) != n || static_cast<std::size_t>(y.size()) != n)
    fail(ErrorKind::shape, "dataset row counts differ: coords=" + std::to_string(n) +
                               " X=" + std::to_string(X.rows()) +
                               " y=" + std::to_string(y.size()));
  if (covariate_names.size() != static_cast<std::size_t>(X.cols()))
    fail(ErrorKind::shape, "covariate name count does not match X columns");
  const bool timed = coords.front().has_time();
  for (std::size_t i = 0; i < n; ++i) {
    if (coords[i].has_time() != timed)
      fail(ErrorKind::validation, "row " + std::to_string(i) + ": mixed coordinate dimensionality");
    if (!std::isfinite(coords[i].s1) || !std::isfinite(coords[i].s2) ||
        (timed && !std::isfinite(*coords[i].t)))
      fail(ErrorKind::validation, "row " + std::to_string(i) + ": non-finite coordinate");
    if (!std::isfinite(y[static_cast<Eigen::Index>(i)]))
      fail(ErrorKind::validation, "row " + std::to_string(i) + ": non-finite response");
    for (Eigen::Index c = 0; c < X.cols(); ++c)
      if (!std::isfinite(X(static_cast<Eigen::Index>(i), c)))
        fail(ErrorKind::validation, "row " + std::to_string(i) + ": non-finite covariate '" +
                                        covariate_names[static_cast<std::size_t>(c)] + "'");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.coords.reserve(rows.size());
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  out.covariate_names = covariate_names;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = rows[k];
    if (r >= size()) fail(ErrorKind::shape, "subset row index out of range");
    const auto ek = static_cast<Eigen::Index>(k);
    const auto er = static_cast<Eigen::Index>(r);
    out.coords.push_back(coords[r]);
    out.X.row(ek) = X.row(er);
    out.y[ek] = y[er];
  }
  return out;
}

Eigen::MatrixXd feature_matrix(const Dataset& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index q = data.X.cols();
  const Eigen::Index extra = data.is_spacetime() ? 3 : 2;
  Eigen::MatrixXd f(n, q + extra);
  if (q > 0) f.leftCols(q) = data.X;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = data.coords[static_cast<std::size_t>(i)];
    f(i, q) = c.s1;
    f(i, q + 1) = c.s2;
    if (extra == 3) f(i, q + 2) = *c.t;
  }
  return f;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
    out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(
        start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t line_no,
                  const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last)
    fail(ErrorKind::parse, source + ": line " + std::to_string(line_no) + ", column '" + column +
                               "': cannot parse '" + cell + "' as a number");
  return v;
}

}  // namespace

Dataset read_csv(std::istream& in, const CsvSchema& schema, const std::string& source) {
  if (schema.coordinates.size() != 2 && schema.coordinates.size() != 3)
    fail(ErrorKind::schema, "schema must name 2 (space) or 3 (space-time) coordinate columns");
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::schema, source + ": missing header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
  const auto header = split_line(line);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c) index.emplace(header[c], c);

  auto column = [&](const std::string& name) -> std::size_t {
    auto it = index.find(name);
    if (it == index.end()) fail(ErrorKind::schema, source + ": missing column '" + name + "'");
    return it->second;
  };
  std::vector<std::size_t> coord_cols;
  for (const auto& name : schema.coordinates) coord_cols.push_back(column(name));
  std::optional<std::size_t> response_col;
  if (schema.response_required || index.count(schema.response)) response_col = column(schema.response);
  std::vector<std::size_t> cov_cols;
  for (const auto& name : schema.covariates) cov_cols.push_back(column(name));

  std::vector<Coordinate> coords;
  std::vector<double> ys, xs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      fail(ErrorKind::parse, source + ": line " + std::to_string(line_no) + " has " +
                                 std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(header.size()));
    auto value = [&](std::size_t col) {
      return parse_cell(cells[col], source, line_no, header[col]);
    };
    Coordinate c{value(coord_cols[0]), value(coord_cols[1]), std::nullopt};
    if (coord_cols.size() == 3) c.t = value(coord_cols[2]);
    coords.push_back(c);
    ys.push_back(response_col ? value(*response_col) : 0.0);
    for (auto col : cov_cols) xs.push_back(value(col));
  }

  Dataset d;
  const auto n = static_cast<Eigen::Index>(coords.size());
  const auto q = static_cast<Eigen::Index>(cov_cols.size());
  d.coords = std::move(coords);
  d.y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  d.X = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xs.data(), n, q);
  d.covariate_names = schema.covariates;
  if (n == 0) fail(ErrorKind::insufficient_data, source + ": no data rows");
  try {
    d.validate();
  } catch (const Error& e) {
    // Row numbers in the message are 0-based data rows; add the file context.
    fail(e.kind(), source + ": " + e.what());
  }
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  return read_csv(in, schema, path.string());
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvSchema default_schema(const Dataset& data) {
  CsvSchema s;
  if (data.is_spacetime()) s.coordinates = {"s1", "s2", "t"};
  s.covariates = data.covariate_names;
  return s;
}

void write_csv(const Dataset& data, std::ostream& out, const CsvSchema& schema) {
  const bool timed = data.is_spacetime();
  if (schema.coordinates.size() != (timed ? 3u : 2u))
    fail(ErrorKind::schema, "schema coordinate count does not match dataset");
  if (schema.covariates.size() != data.n_covariates())
    fail(ErrorKind::schema, "schema covariate count does not match dataset");
  std::string sep;
  for (const auto& c : schema.coordinates) { out << sep << c; sep = ","; }
  out << ',' << schema.response;
  for (const auto& c : schema.covariates) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto ei = static_cast<Eigen::Index>(i);
    const auto& c = data.coords[i];
    out << format_double(c.s1) << ',' << format_double(c.s2);
    if (timed) out << ',' << format_double(*c.t);
    out << ',' << format_double(data.y[ei]);
    for (Eigen::Index k = 0; k < data.X.cols(); ++k) out << ',' << format_double(data.X(ei, k));
    out << '\n';
  }
}

void save_csv(const Dataset& data, const std::filesystem::path& path, const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  write_csv(data, out, schema);
  if (!out) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
}

std::vector<DistancePair> pairwise_distances(std::span<const Coordinate> coords) {
  const auto n = coords.size();
  if (n < 2) fail(ErrorKind::insufficient_data, "pairwise distances need at least 2 coordinates");
  std::vector<DistancePair> pairs;
  pairs.reserve(n * (n - 1) / 2);
  const bool timed = coords.front().has_time();
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      DistancePair p{i, j, spatial_distance(coords[i], coords[j]), std::nullopt};
      if (timed) p.h_temporal = temporal_distance(coords[i], coords[j]);
      pairs.push_back(p);
    }
  return pairs;
}

}  // namespace treeging

#include "treeging/errors.hpp"

namespace treeging {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::schema: return "schema";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::shape: return "shape";
    case ErrorKind::domain: return "domain";
    case ErrorKind::config: return "config";
    case ErrorKind::singular_design: return "singular-design";
    case ErrorKind::ill_conditioned: return "ill-conditioned-covariance";
    case ErrorKind::empty_variogram: return "empty-variogram";
    case ErrorKind::degenerate_variogram: return "degenerate-variogram";
    case ErrorKind::archive_version: return "archive-version";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return 10;
    case ErrorKind::schema: return 11;
    case ErrorKind::parse: return 12;
    case ErrorKind::validation: return 13;
    case ErrorKind::insufficient_data: return 14;
    case ErrorKind::shape: return 15;
    case ErrorKind::domain: return 16;
    case ErrorKind::config: return 17;
    case ErrorKind::singular_design: return 18;
    case ErrorKind::ill_conditioned: return 19;
    case ErrorKind::empty_variogram: return 20;
    case ErrorKind::degenerate_variogram: return 21;
    case ErrorKind::archive_version: return 22;
  }
  return 1;
}

}  // namespace treeging

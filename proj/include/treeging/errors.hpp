#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treeging {

// Every failure raised by the library carries one of these kinds. The CLI
// maps each kind to a fixed process exit code.
enum class ErrorKind {
  io,
  schema,
  parse,
  validation,
  insufficient_data,
  shape,
  domain,
  config,
  singular_design,
  ill_conditioned,
  empty_variogram,
  degenerate_variogram,
  archive_version,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

std::string_view to_string(ErrorKind kind);

// Stable process exit code for each error class (0 is reserved for success).
int exit_code(ErrorKind kind);

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace treeging

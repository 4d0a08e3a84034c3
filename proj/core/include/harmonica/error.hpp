#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace harmonica {

enum class ErrorKind {
  truncation_cap,
  convergence,
  unsupported_activation,
  degenerate_patch,
  structural,
  domain,
  quadrature,
  solver,
  fit,
  validation,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers switch on kind() when the
// category matters (the CLI maps validation errors and numerical failures to
// distinct exit codes).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace harmonica

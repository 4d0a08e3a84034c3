#include "harmonica/error.hpp"

namespace harmonica {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::truncation_cap: return "truncation-cap";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::unsupported_activation: return "unsupported-activation";
    case ErrorKind::degenerate_patch: return "degenerate-patch";
    case ErrorKind::structural: return "structural";
    case ErrorKind::domain: return "domain";
    case ErrorKind::quadrature: return "quadrature";
    case ErrorKind::solver: return "solver";
    case ErrorKind::fit: return "fit";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace harmonica

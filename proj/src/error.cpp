#include "hkt/error.hpp"

namespace hkt {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Argument: return "argument error";
    case ErrorKind::UnsupportedDimension: return "unsupported dimension";
    case ErrorKind::Corner: return "corner error";
    case ErrorKind::DomainMembership: return "domain membership error";
    case ErrorKind::Geometry: return "geometry error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::BackendUnavailable: return "backend unavailable";
    case ErrorKind::Truncation: return "truncation error";
    case ErrorKind::Window: return "window error";
    case ErrorKind::InsufficientRange: return "insufficient range";
    case ErrorKind::SignalTooSmall: return "signal too small";
    case ErrorKind::DegenerateInput: return "degenerate input";
    case ErrorKind::Parse: return "parse error";
  }
  return "error";
}

}  // namespace hkt

#include "igagrf/error.hpp"

namespace igagrf {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::SingularGeometry: return "singular geometry";
    case ErrorKind::OpenSurface: return "open surface";
    case ErrorKind::IncompatibleInterface: return "incompatible interface";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::IndefiniteOperator: return "indefinite operator";
    case ErrorKind::MaxIterations: return "maximum iterations reached";
    case ErrorKind::DegenerateOperator: return "degenerate operator";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

}  // namespace igagrf

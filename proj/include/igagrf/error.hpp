#pragma once

#include <stdexcept>
#include <string>

namespace igagrf {

enum class ErrorKind {
  Domain,
  InvalidArgument,
  SingularGeometry,
  OpenSurface,
  IncompatibleInterface,
  Parse,
  IndefiniteOperator,
  MaxIterations,
  DegenerateOperator,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; the kind distinguishes failure modes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace igagrf

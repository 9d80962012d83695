#pragma once

#include <stdexcept>
#include <string>

namespace hkt {

enum class ErrorKind {
  Argument,
  UnsupportedDimension,
  Corner,
  DomainMembership,
  Geometry,
  Numeric,
  BackendUnavailable,
  Truncation,
  Window,
  InsufficientRange,
  SignalTooSmall,
  DegenerateInput,
  Parse,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hkt

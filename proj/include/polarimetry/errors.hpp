#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polarimetry {

enum class ErrorKind {
  InvalidState,
  DegeneratePole,
  BadArity,
  OptimizerNoConverge,
  SingularQfi,
  CutoffTooSmall,
  IllConditioned,
  SingularArm,
  SingularFisher,
  WrongReceiver,
  AllZeroCounts,
  NoConverge,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception; `kind()` lets callers (the CLI in particular) map
/// failures to exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace polarimetry

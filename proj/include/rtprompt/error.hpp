#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtprompt {

enum class Errc {
  InvalidSpacing,
  EmptyForeground,
  DegenerateIntensity,
  EmptyMask,
  FormatError,
  NoDose,
  GridMismatch,
  InvalidProbability,
  UndefinedDistance,
  InfeasibleSpec,
  TrainingDiverged,
  InvalidArgument,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit path) can branch on it without parsing text.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string &detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

/// Library warnings go to stderr unless silenced (the CLI silences them
/// when not running with --verbose, tests silence them globally).
void warn(std::string_view message);
void set_warnings_enabled(bool enabled) noexcept;

} // namespace rtprompt

#include "rtprompt/error.hpp"

#include <atomic>
#include <iostream>

namespace rtprompt {

namespace {
std::atomic<bool> g_warnings_enabled{true};
}

std::string_view to_string(Errc code) noexcept {
  switch (code) {
  case Errc::InvalidSpacing: return "InvalidSpacing";
  case Errc::EmptyForeground: return "EmptyForeground";
  case Errc::DegenerateIntensity: return "DegenerateIntensity";
  case Errc::EmptyMask: return "EmptyMask";
  case Errc::FormatError: return "FormatError";
  case Errc::NoDose: return "NoDose";
  case Errc::GridMismatch: return "GridMismatch";
  case Errc::InvalidProbability: return "InvalidProbability";
  case Errc::UndefinedDistance: return "UndefinedDistance";
  case Errc::InfeasibleSpec: return "InfeasibleSpec";
  case Errc::TrainingDiverged: return "TrainingDiverged";
  case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

void warn(std::string_view message) {
  if (g_warnings_enabled.load(std::memory_order_relaxed)) {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_warnings_enabled(bool enabled) noexcept { g_warnings_enabled.store(enabled, std::memory_order_relaxed); }

} // namespace rtprompt

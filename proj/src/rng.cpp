#include "rtprompt/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rtprompt/error.hpp"

namespace rtprompt {

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t SeededRng::uniform_index(std::uint64_t n) {
  if (n == 0) {
    throw Error(Errc::InvalidArgument, "uniform_index needs a positive bound");
  }
  // reject the top partial block so every residue is equally likely
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) {
    x = engine_();
  }
  return x % n;
}

double SeededRng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) {
    u1 = uniform01();
  }
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t SeededRng::fork_seed() { return mix_seed(engine_()); }

} // namespace rtprompt

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace rtprompt {

/// Explicitly seeded random source. The engine is std::mt19937_64, whose
/// output sequence is fixed by the C++ standard; the bounded-integer,
/// uniform-real and normal draws below are implemented here instead of
/// through <random> distributions (whose algorithms vary between standard
/// libraries), so a seed reproduces the same draws on every toolchain.
class SeededRng {
public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/rejection-u64/u53-real/box-muller";

  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller (one draw per call; the pair's second
  /// value is cached).
  double normal();

  /// Derives an independent child seed; used to hand per-case streams out
  /// of one master seed.
  std::uint64_t fork_seed();

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finaliser, used for seed derivation.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

} // namespace rtprompt

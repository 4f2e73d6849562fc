#pragma once

#include <filesystem>
#include <string>

#include <doctest.h>

#include "rtprompt/error.hpp"
#include "rtprompt/grid.hpp"
#include "rtprompt/rng.hpp"

// Fails unless `expr` throws rtprompt::Error carrying `errc`.
#define CHECK_ERRC(expr, errc)                                                                                      \
  do {                                                                                                              \
    bool thrown_ = false;                                                                                           \
    try {                                                                                                           \
      (void)(expr);                                                                                                 \
    } catch (const rtprompt::Error &e_) {                                                                           \
      thrown_ = true;                                                                                               \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());                                                                \
    }                                                                                                               \
    CHECK_MESSAGE(thrown_, #expr " did not throw");                                                                 \
  } while (0)

namespace testing {

inline std::filesystem::path scratch_dir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rtprompt_tests_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline rtprompt::Mask random_mask(const rtprompt::Geometry &g, double density, rtprompt::SeededRng &rng) {
  rtprompt::Mask m(g);
  for (auto &v : m.values()) v = rng.bernoulli(density) ? 1 : 0;
  return m;
}

} // namespace testing

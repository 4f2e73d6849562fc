#pragma once

// Simulated click prompts drawn from the disagreement between a prediction
// and the ground truth. Positive clicks mark missed foreground, negative
// clicks mark spurious foreground.

#include <cstddef>
#include <vector>

#include "rtprompt/grid.hpp"
#include "rtprompt/rng.hpp"

namespace rtprompt {

enum class Polarity { Positive, Negative };

struct Click {
  VoxelIndex pos;
  Polarity polarity = Polarity::Positive;

  friend bool operator==(const Click &, const Click &) = default;
};

struct ClickSchedule {
  /// Refinement rounds after the initial click-free round. 0 disables clicks.
  int iterations = 3;
  int clicks_per_iteration = 4;
  /// Keep earlier rounds' clicks instead of replacing them.
  bool accumulate = true;

  void validate() const;
};

struct ErrorRegions {
  Mask fn;
  Mask fp;
};

/// fn = gt & !pred, fp = pred & !gt. Throws GridMismatch.
ErrorRegions error_regions(const Mask &pred, const Mask &gt);

/// Draws min(n, |fn u fp|) distinct voxels uniformly from the union
/// (partial Fisher-Yates over the union listed in linear order).
std::vector<Click> sample_clicks(const Mask &fn, const Mask &fp, std::size_t n, SeededRng &rng);

/// Binarizes `prediction` at `threshold`, then samples n clicks from its errors.
std::vector<Click> refine_round(const ProbVolume &prediction, const Mask &gt, double threshold, std::size_t n,
                                SeededRng &rng);

} // namespace rtprompt

#pragma once

// Small-target focus (STF) loss: a Dice term and a Focal Tversky term, both
// evaluated only over the ROI voxels Omega_r = {v : r(v) = 1}:
//
//   L_STF  = lambda1 * L_Dice + lambda2 * L_FT
//   L_Dice = 1 - (2 TP + eps) / (sum p + sum y + eps)
//   L_FT   = (1 - (TP + eps) / (TP + alpha FP + beta FN + eps))^gamma
//
// with soft counts TP = sum p y, FP = sum p (1 - y), FN = sum (1 - p) y over
// Omega_r. Sums run in linear voxel order, so values are reproducible.

#include <cstdint>
#include <span>

#include "rtprompt/grid.hpp"

namespace rtprompt {

struct LossParams {
  double lambda1 = 0.7;  // Dice weight
  double lambda2 = 0.3;  // Focal Tversky weight
  double alpha = 0.5;    // FP weight
  double beta = 0.5;     // FN weight
  double gamma = 0.75;   // focal exponent
  double epsilon = 1e-5;

  /// Throws InvalidArgument unless weights are non-negative, gamma > 0, epsilon > 0.
  void validate() const;
};

struct ConfusionTerms {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  /// sum of p and y over the ROI (Dice denominator pieces)
  double sum_p = 0.0;
  double sum_y = 0.0;
  std::size_t roi_voxels = 0;
};

/// Throws GridMismatch, or InvalidProbability for p outside [0, 1] (checked
/// over the whole grid, not just the ROI).
ConfusionTerms soft_confusion(const ProbVolume &p, const Mask &y, const Mask &r);

double dice_roi(const ProbVolume &p, const Mask &y, const Mask &r, double epsilon = 1e-5);
double focal_tversky_roi(const ProbVolume &p, const Mask &y, const Mask &r, const LossParams &params = {});

struct LossTerms {
  double dice = 0.0;
  double focal_tversky = 0.0;
  double stf = 0.0;
};

/// Both terms and their weighted sum from one pass. An empty ROI gives all
/// zeros and a warning (it means the dose prompt failed upstream).
LossTerms stf_terms(const ProbVolume &p, const Mask &y, const Mask &r, const LossParams &params = {});

double stf(const ProbVolume &p, const Mask &y, const Mask &r, const LossParams &params = {});

/// dL_STF / dp(v) for every voxel; zero outside the ROI. Where gamma < 1 and
/// the Focal Tversky base is exactly 0 the FT contribution is taken as 0.
ProbVolume stf_grad(const ProbVolume &p, const Mask &y, const Mask &r, const LossParams &params = {});

/// ROI-compacted form: `p` and `y` hold only the ROI voxels, in any fixed
/// order. When `grad` is non-empty (same length as p) it receives dL/dp.
/// The full-grid functions above gather into this form.
LossTerms stf_compact(std::span<const double> p, std::span<const std::uint8_t> y, const LossParams &params,
                      std::span<double> grad = {});

/// Loss and gradient together.
struct LossAndGrad {
  LossTerms loss;
  ProbVolume grad;
};
LossAndGrad stf_with_grad(const ProbVolume &p, const Mask &y, const Mask &r, const LossParams &params = {});

} // namespace rtprompt

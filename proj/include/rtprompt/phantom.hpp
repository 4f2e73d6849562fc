#pragma once

// Synthetic radiotherapy cases: a Gaussian dose peak, one or two
// ellipsoidal lesions seeded inside the 0.6 * D_max region, and a task-styled
// image (body outline, smooth texture, seeded noise, lesion contrast).

#include <array>
#include <cstdint>
#include <vector>

#include "rtprompt/case.hpp"
#include "rtprompt/grid.hpp"
#include "rtprompt/rng.hpp"
#include "rtprompt/textprompt.hpp"

namespace rtprompt {

struct PhantomSpec {
  Task task = Task::ORN;
  std::array<int, 3> dims{48, 48, 48};
  Vec3 spacing{1.0, 1.0, 1.0};
  std::uint64_t seed = 0;
  double lesion_radius_min_mm = 2.5;
  double lesion_radius_max_mm = 5.0;
  int max_lesions = 2;
  double dose_peak_gy = 60.0;
  /// Base Gaussian width; each axis is scaled by a seeded factor in [0.8, 1.2].
  double dose_sigma_mm = 9.0;
  /// Lesions must lie in {dose >= lesion_dose_fraction * D_max}.
  double lesion_dose_fraction = 0.6;
  /// Lesion contrast in units of noise_sd; sign gives hyper/hypo intensity.
  double contrast = 4.0;
  double noise_sd = 10.0;
  double texture_amplitude = 8.0;
  double background = 100.0;

  void validate() const;
};

/// Task-styled defaults: ORN hyper-dense on a CT-like background, CE
/// diffuse hyper-intensity, CRN rim enhancement around a milder core.
PhantomSpec default_phantom_spec(Task task, std::uint64_t seed);

using PhantomCase = Case;

/// Deterministic for a given PhantomSpec (seed included). Throws InfeasibleSpec when the
/// lesions cannot be placed inside the high-dose region or would exceed 2%
/// of the grid.
PhantomCase generate_case(const PhantomSpec &spec);

/// Seed of case `index` in a dataset drawn from master seed `seed`.
std::uint64_t phantom_case_seed(std::uint64_t seed, std::size_t index) noexcept;

/// `n` cases of one task from default_phantom_spec, case i seeded with
/// phantom_case_seed(seed, i).
std::vector<PhantomCase> generate_dataset(Task task, std::size_t n, std::uint64_t seed);

struct AugmentConfig {
  bool flip = true;
  double flip_probability = 0.5;
  bool affine = true;
  double max_rotation_deg = 10.0;
  double scale_min = 0.9;
  double scale_max = 1.1;
  bool noise = true;
  /// Noise sd drawn from [0, max_noise_fraction * image sd].
  double max_noise_fraction = 0.1;
  bool blur = true;
  double max_blur_sigma_vox = 1.0;
  bool gamma = true;
  double gamma_min = 0.7;
  double gamma_max = 1.4;

  static AugmentConfig flips_only();
  static AugmentConfig intensity_only();
};

/// Mirrors all three grids along one axis (0 = x, 1 = y, 2 = z).
PhantomCase flip(const PhantomCase &c, int axis);

/// Seeded augmentation pipeline: flips, affine (rotation about a random axis
/// and isotropic scale about the grid centre; trilinear for image and dose,
/// nearest for gt), additive noise, Gaussian blur, gamma. Geometric steps
/// share one set of sampled parameters across image, dose and gt;
/// intensity steps touch only the image.
PhantomCase augment(const PhantomCase &c, SeededRng &rng, const AugmentConfig &cfg = {});

} // namespace rtprompt

#include "rtprompt/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "rtprompt/volgrid.hpp"

namespace rtprompt {

namespace {

struct Ellipsoid {
  Vec3 centre;
  Vec3 semi_axes;
};

Vec3 voxel_position(const Geometry &g, int i, int j, int k) {
  return {g.origin[0] + i * g.spacing[0], g.origin[1] + j * g.spacing[1], g.origin[2] + k * g.spacing[2]};
}

// Normalised radius: <= 1 inside the ellipsoid.
double ellipsoid_rho(const Ellipsoid &e, const Vec3 &p) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double d = (p[a] - e.centre[a]) / e.semi_axes[a];
    s += d * d;
  }
  return std::sqrt(s);
}

// Contrast multiplier (times spec.contrast * noise_sd) at normalised radius rho.
double contrast_profile(Task task, double rho) {
  switch (task) {
  case Task::ORN:
    return rho <= 1.0 ? 1.0 : 0.0;
  case Task::CE:
    // strongest centrally, fading edge plus a faint halo just outside
    if (rho <= 1.0) {
      return 1.15 - 0.35 * rho * rho;
    }
    return rho < 1.25 ? 0.3 * (1.25 - rho) / 0.25 : 0.0;
  case Task::CRN:
    if (rho > 1.0) {
      return 0.0;
    }
    return rho >= 0.6 ? 1.25 : 0.7;
  }
  return 0.0;
}

const char *diagnosis_of(Task task) {
  switch (task) {
  case Task::ORN: return "osteoradionecrosis";
  case Task::CE: return "cerebral edema";
  case Task::CRN: return "cerebral radiation necrosis";
  }
  return "";
}

const char *modality_of(Task task) {
  switch (task) {
  case Task::ORN: return "CT";
  case Task::CE: return "T2-FLAIR";
  case Task::CRN: return "T1 post-contrast";
  }
  return "";
}

float sample_trilinear(const Volume &v, double x, double y, double z) {
  const auto &d = v.dims();
  x = std::clamp(x, 0.0, static_cast<double>(d[0] - 1));
  y = std::clamp(y, 0.0, static_cast<double>(d[1] - 1));
  z = std::clamp(z, 0.0, static_cast<double>(d[2] - 1));
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y)),
            z0 = static_cast<int>(std::floor(z));
  const int x1 = std::min(x0 + 1, d[0] - 1), y1 = std::min(y0 + 1, d[1] - 1), z1 = std::min(z0 + 1, d[2] - 1);
  const double fx = x - x0, fy = y - y0, fz = z - z0;
  const auto c = [&](int i, int j, int k) { return static_cast<double>(v.at(i, j, k)); };
  const double a = c(x0, y0, z0) * (1 - fx) + c(x1, y0, z0) * fx;
  const double b = c(x0, y1, z0) * (1 - fx) + c(x1, y1, z0) * fx;
  const double e = c(x0, y0, z1) * (1 - fx) + c(x1, y0, z1) * fx;
  const double f = c(x0, y1, z1) * (1 - fx) + c(x1, y1, z1) * fx;
  return static_cast<float>(((a * (1 - fy) + b * fy) * (1 - fz)) + ((e * (1 - fy) + f * fy) * fz));
}

using Mat3 = std::array<std::array<double, 3>, 3>;

// Rotation by `angle` about unit axis `u` (Rodrigues).
Mat3 rotation(const Vec3 &u, double angle) {
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  return {{{t * u[0] * u[0] + c, t * u[0] * u[1] - s * u[2], t * u[0] * u[2] + s * u[1]},
           {t * u[0] * u[1] + s * u[2], t * u[1] * u[1] + c, t * u[1] * u[2] - s * u[0]},
           {t * u[0] * u[2] - s * u[1], t * u[1] * u[2] + s * u[0], t * u[2] * u[2] + c}}};
}

template <typename T, typename Sampler>
Grid<T> warp(const Grid<T> &in, const Mat3 &inverse_rot, double scale, Sampler &&sample) {
  const Geometry &g = in.geometry();
  const Vec3 centre{(g.dims[0] - 1) / 2.0, (g.dims[1] - 1) / 2.0, (g.dims[2] - 1) / 2.0};
  Grid<T> out(g);
  std::size_t offset = 0;
  for (int k = 0; k < g.dims[2]; ++k) {
    for (int j = 0; j < g.dims[1]; ++j) {
      for (int i = 0; i < g.dims[0]; ++i, ++offset) {
        // in mm so rotation stays rigid on anisotropic grids
        const Vec3 d{(i - centre[0]) * g.spacing[0], (j - centre[1]) * g.spacing[1], (k - centre[2]) * g.spacing[2]};
        Vec3 src{};
        for (int r = 0; r < 3; ++r) {
          const double mm = (inverse_rot[r][0] * d[0] + inverse_rot[r][1] * d[1] + inverse_rot[r][2] * d[2]) / scale;
          src[r] = centre[r] + mm / g.spacing[r];
        }
        out[offset] = sample(in, src[0], src[1], src[2]);
      }
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double w = std::exp(-0.5 * (t * t) / (sigma * sigma));
    k[static_cast<std::size_t>(t + radius)] = w;
    sum += w;
  }
  for (double &w : k) {
    w /= sum;
  }
  return k;
}

Volume blur(const Volume &in, double sigma_vox) {
  const std::vector<double> kernel = gaussian_kernel(sigma_vox);
  const int radius = static_cast<int>(kernel.size() / 2);
  const Geometry &g = in.geometry();
  Volume cur = in;
  for (int axis = 0; axis < 3; ++axis) {
    Volume next(g);
    for (int k = 0; k < g.dims[2]; ++k) {
      for (int j = 0; j < g.dims[1]; ++j) {
        for (int i = 0; i < g.dims[0]; ++i) {
          std::array<int, 3> idx{i, j, k};
          const int centre = idx[axis];
          double acc = 0.0;
          for (int t = -radius; t <= radius; ++t) {
            idx[axis] = std::clamp(centre + t, 0, g.dims[axis] - 1);
            acc += kernel[static_cast<std::size_t>(t + radius)] * cur.at(idx[0], idx[1], idx[2]);
          }
          next.at(i, j, k) = static_cast<float>(acc);
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

template <typename T>
Grid<T> flip_grid(const Grid<T> &in, int axis) {
  const Geometry &g = in.geometry();
  Grid<T> out(g);
  for (int k = 0; k < g.dims[2]; ++k) {
    for (int j = 0; j < g.dims[1]; ++j) {
      for (int i = 0; i < g.dims[0]; ++i) {
        std::array<int, 3> src{i, j, k};
        src[axis] = g.dims[axis] - 1 - src[axis];
        out.at(i, j, k) = in.at(src[0], src[1], src[2]);
      }
    }
  }
  return out;
}

} // namespace

void PhantomSpec::validate() const {
  Geometry{dims, spacing, {0, 0, 0}}.validate();
  if (!(lesion_radius_min_mm > 0.0) || lesion_radius_max_mm < lesion_radius_min_mm) {
    throw Error(Errc::InfeasibleSpec, "lesion radius range must be positive and ordered");
  }
  if (max_lesions < 1) {
    throw Error(Errc::InfeasibleSpec, "need at least one lesion");
  }
  if (!(dose_peak_gy > 0.0) || !(dose_sigma_mm > 0.0) || !(noise_sd > 0.0)) {
    throw Error(Errc::InfeasibleSpec, "dose peak, dose sigma and noise sd must be positive");
  }
  if (!(lesion_dose_fraction > 0.0 && lesion_dose_fraction < 1.0)) {
    throw Error(Errc::InfeasibleSpec, "lesion dose fraction must lie in (0, 1)");
  }
}

PhantomSpec default_phantom_spec(Task task, std::uint64_t seed) {
  PhantomSpec s;
  s.task = task;
  s.seed = seed;
  switch (task) {
  case Task::ORN:
    s.background = 60.0;
    s.contrast = 4.0;
    break;
  case Task::CE:
    s.background = 200.0;
    s.contrast = 3.5;
    break;
  case Task::CRN:
    s.background = 150.0;
    s.contrast = 3.5;
    break;
  }
  return s;
}

PhantomCase generate_case(const PhantomSpec &spec) {
  spec.validate();
  SeededRng rng(mix_seed(spec.seed) ^ (static_cast<std::uint64_t>(spec.task) + 1) * 0x2545f4914f6cdd1dULL);
  const Geometry g{spec.dims, spec.spacing, {0.0, 0.0, 0.0}};
  const Vec3 extent{(g.dims[0] - 1) * g.spacing[0], (g.dims[1] - 1) * g.spacing[1], (g.dims[2] - 1) * g.spacing[2]};

  // dose: anisotropic Gaussian peak in the middle half of the grid
  Vec3 dose_centre{}, dose_sigma{};
  for (int a = 0; a < 3; ++a) {
    dose_centre[a] = extent[a] * rng.uniform(0.35, 0.65);
    dose_sigma[a] = spec.dose_sigma_mm * rng.uniform(0.8, 1.2);
  }
  PhantomCase out{Volume(g), Volume(g), Mask(g), {}};
  std::vector<std::size_t> candidates;
  const double lesion_floor = spec.lesion_dose_fraction * spec.dose_peak_gy;
  std::size_t offset = 0;
  for (int k = 0; k < g.dims[2]; ++k) {
    for (int j = 0; j < g.dims[1]; ++j) {
      for (int i = 0; i < g.dims[0]; ++i, ++offset) {
        const Vec3 p = voxel_position(g, i, j, k);
        double e = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double d = (p[a] - dose_centre[a]) / dose_sigma[a];
          e += d * d;
        }
        out.dose[offset] = static_cast<float>(spec.dose_peak_gy * std::exp(-0.5 * e));
        if (out.dose[offset] >= lesion_floor) {
          candidates.push_back(offset);
        }
      }
    }
  }
  // D_max is attained on the grid, so the floor is relative to the sampled max
  const double d_max = *std::max_element(out.dose.values().begin(), out.dose.values().end());
  const double floor_gy = spec.lesion_dose_fraction * d_max;
  if (candidates.empty()) {
    throw Error(Errc::InfeasibleSpec, "no voxels in the lesion dose region");
  }

  const int n_lesions = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spec.max_lesions)));
  std::vector<Ellipsoid> lesions;
  constexpr int kAttempts = 500;
  for (int l = 0; l < n_lesions; ++l) {
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      const VoxelIndex c = g.index(candidates[rng.uniform_index(candidates.size())]);
      Ellipsoid e{voxel_position(g, c.i, c.j, c.k), {}};
      for (int a = 0; a < 3; ++a) {
        e.semi_axes[a] = rng.uniform(spec.lesion_radius_min_mm, spec.lesion_radius_max_mm);
      }
      // every covered voxel must stay in the grid and above the dose floor
      bool ok = true;
      int lo[3], hi[3];
      for (int a = 0; a < 3 && ok; ++a) {
        lo[a] = static_cast<int>(std::floor((e.centre[a] - e.semi_axes[a]) / g.spacing[a]));
        hi[a] = static_cast<int>(std::ceil((e.centre[a] + e.semi_axes[a]) / g.spacing[a]));
        ok = lo[a] >= 0 && hi[a] < g.dims[a];
      }
      for (int k = lo[2]; ok && k <= hi[2]; ++k) {
        for (int j = lo[1]; ok && j <= hi[1]; ++j) {
          for (int i = lo[0]; ok && i <= hi[0]; ++i) {
            if (ellipsoid_rho(e, voxel_position(g, i, j, k)) <= 1.0 && static_cast<double>(out.dose.at(i, j, k)) < floor_gy) {
              ok = false;
            }
          }
        }
      }
      if (ok) {
        lesions.push_back(e);
        placed = true;
      }
    }
    if (!placed) {
      throw Error(Errc::InfeasibleSpec, "could not fit a lesion inside the high-dose region");
    }
  }

  // texture: three low-frequency plane waves
  struct Wave {
    Vec3 k;
    double phase;
  };
  std::array<Wave, 3> waves{};
  for (Wave &w : waves) {
    for (int a = 0; a < 3; ++a) {
      w.k[a] = 2.0 * std::numbers::pi * static_cast<double>(rng.uniform_index(3)) / (extent[a] + g.spacing[a]);
    }
    w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  const double contrast_units = spec.contrast * spec.noise_sd;
  offset = 0;
  for (int k = 0; k < g.dims[2]; ++k) {
    for (int j = 0; j < g.dims[1]; ++j) {
      for (int i = 0; i < g.dims[0]; ++i, ++offset) {
        const Vec3 p = voxel_position(g, i, j, k);
        double body = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double d = (p[a] - extent[a] / 2.0) / (0.47 * (extent[a] + g.spacing[a]));
          body += d * d;
        }
        double rho = 1e9;
        for (const Ellipsoid &e : lesions) {
          rho = std::min(rho, ellipsoid_rho(e, p));
        }
        if (rho <= 1.0) {
          out.gt[offset] = 1;
        }
        // noise is drawn for every voxel so the stream does not depend on the body shape
        const double noise = rng.normal() * spec.noise_sd;
        if (body > 1.0) {
          continue;
        }
        double texture = 0.0;
        for (const Wave &w : waves) {
          texture += std::cos(w.k[0] * p[0] + w.k[1] * p[1] + w.k[2] * p[2] + w.phase);
        }
        const double v = spec.background + spec.texture_amplitude * texture / 3.0 + noise +
                         contrast_units * contrast_profile(spec.task, rho);
        // zero marks air; keep tissue strictly nonzero
        out.image[offset] = static_cast<float>(v == 0.0 ? 1e-3 : v);
      }
    }
  }

  if (static_cast<double>(count(out.gt)) >= 0.02 * static_cast<double>(g.voxel_count())) {
    throw Error(Errc::InfeasibleSpec, "lesions exceed 2% of the grid");
  }
  if (count(out.gt) == 0) {
    throw Error(Errc::InfeasibleSpec, "lesions cover no voxel centres");
  }

  static constexpr std::array<const char *, 4> kAgeBands{"40-49", "50-59", "60-69", "70-79"};
  out.text.task = spec.task;
  out.text.clinical = {{"diagnosis", diagnosis_of(spec.task)},
                       {"modality", modality_of(spec.task)},
                       {"prescription_gy", std::to_string(static_cast<int>(std::lround(spec.dose_peak_gy)))}};
  out.text.demographic = {{"age_band", kAgeBands[rng.uniform_index(kAgeBands.size())]},
                          {"sex", rng.bernoulli(0.5) ? "F" : "M"}};
  return out;
}

std::uint64_t phantom_case_seed(std::uint64_t seed, std::size_t index) noexcept {
  return mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(index)));
}

std::vector<PhantomCase> generate_dataset(Task task, std::size_t n, std::uint64_t seed) {
  std::vector<PhantomCase> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(generate_case(default_phantom_spec(task, phantom_case_seed(seed, i))));
  }
  return out;
}

AugmentConfig AugmentConfig::flips_only() {
  AugmentConfig c;
  c.affine = c.noise = c.blur = c.gamma = false;
  return c;
}

AugmentConfig AugmentConfig::intensity_only() {
  AugmentConfig c;
  c.flip = c.affine = false;
  return c;
}

PhantomCase flip(const PhantomCase &c, int axis) {
  if (axis < 0 || axis > 2) {
    throw Error(Errc::InvalidArgument, "flip axis must be 0, 1 or 2");
  }
  return {flip_grid(c.image, axis), flip_grid(c.dose, axis), flip_grid(c.gt, axis), c.text};
}

PhantomCase augment(const PhantomCase &c, SeededRng &rng, const AugmentConfig &cfg) {
  PhantomCase out = c;
  if (cfg.flip) {
    for (int axis = 0; axis < 3; ++axis) {
      if (rng.bernoulli(cfg.flip_probability)) {
        out = flip(out, axis);
      }
    }
  }
  if (cfg.affine) {
    // uniform random axis on the sphere
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(1.0 - z * z);
    const Vec3 axis{r * std::cos(phi), r * std::sin(phi), z};
    const double angle = rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg) * std::numbers::pi / 180.0;
    const double scale = rng.uniform(cfg.scale_min, cfg.scale_max);
    const Mat3 inv = rotation(axis, -angle);
    out.image = warp(out.image, inv, scale, sample_trilinear);
    out.dose = warp(out.dose, inv, scale, sample_trilinear);
    out.gt = warp(out.gt, inv, scale, [](const Mask &m, double x, double y, double zz) {
      const auto &d = m.dims();
      const auto nearest = [](double v, int n) { return std::clamp(static_cast<int>(std::floor(v + 0.5)), 0, n - 1); };
      return m.at(nearest(x, d[0]), nearest(y, d[1]), nearest(zz, d[2]));
    });
  }
  if (cfg.noise) {
    double sum = 0.0, ss = 0.0;
    for (float v : out.image.values()) {
      sum += v;
    }
    const double mean = sum / static_cast<double>(out.image.size());
    for (float v : out.image.values()) {
      ss += (v - mean) * (v - mean);
    }
    const double sd = rng.uniform(0.0, cfg.max_noise_fraction) * std::sqrt(ss / static_cast<double>(out.image.size()));
    for (float &v : out.image.values()) {
      const double n = sd * rng.normal();
      if (v != 0.0f) {
        v = static_cast<float>(v + n);
      }
    }
  }
  if (cfg.blur) {
    const double sigma = rng.uniform(0.0, cfg.max_blur_sigma_vox);
    if (sigma > 1e-3) {
      out.image = blur(out.image, sigma);
    }
  }
  if (cfg.gamma) {
    const double g = rng.uniform(cfg.gamma_min, cfg.gamma_max);
    const auto [lo_it, hi_it] = std::minmax_element(out.image.values().begin(), out.image.values().end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi > lo) {
      for (float &v : out.image.values()) {
        v = static_cast<float>(lo + (hi - lo) * std::pow((v - lo) / (hi - lo), g));
      }
    }
  }
  return out;
}

} // namespace rtprompt

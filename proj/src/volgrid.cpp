#include "rtprompt/volgrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rtprompt {

namespace {

struct AxisSample {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;
};

// Input-index sample position for each output index along one axis.
std::vector<AxisSample> axis_samples(int n_in, int n_out, double ratio, Interpolation mode) {
  std::vector<AxisSample> out(static_cast<std::size_t>(n_out));
  const double last = static_cast<double>(n_in - 1);
  for (int o = 0; o < n_out; ++o) {
    const double pos = std::clamp(static_cast<double>(o) * ratio, 0.0, last);
    AxisSample s;
    if (mode == Interpolation::Nearest) {
      s.lo = s.hi = std::min(static_cast<int>(std::floor(pos + 0.5)), n_in - 1);
    } else {
      s.lo = static_cast<int>(std::floor(pos));
      s.hi = std::min(s.lo + 1, n_in - 1);
      s.frac = pos - static_cast<double>(s.lo);
    }
    out[static_cast<std::size_t>(o)] = s;
  }
  return out;
}

template <typename T>
T from_interpolated(double v) {
  if constexpr (std::is_same_v<T, std::uint8_t>) {
    return v >= 0.5 ? std::uint8_t{1} : std::uint8_t{0};
  } else {
    return static_cast<T>(v);
  }
}

} // namespace

template <typename T>
Grid<T> resample(const Grid<T> &in, const Vec3 &target_spacing, Interpolation mode) {
  for (double s : target_spacing) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(Errc::InvalidSpacing, "target spacing components must be positive");
    }
  }
  const Geometry &gin = in.geometry();
  Geometry gout = gin;
  std::array<std::vector<AxisSample>, 3> samples;
  for (int a = 0; a < 3; ++a) {
    const double extent = static_cast<double>(gin.dims[a]) * gin.spacing[a] / target_spacing[a];
    gout.dims[a] = std::max(1, static_cast<int>(std::ceil(extent - 1e-9)));
    gout.spacing[a] = target_spacing[a];
    // ratio first so that identical spacings give exactly integer positions
    const double ratio = target_spacing[a] / gin.spacing[a];
    samples[a] = axis_samples(gin.dims[a], gout.dims[a], ratio, mode);
  }

  Grid<T> out(gout);
  std::size_t offset = 0;
  for (int k = 0; k < gout.dims[2]; ++k) {
    const AxisSample &sz = samples[2][static_cast<std::size_t>(k)];
    for (int j = 0; j < gout.dims[1]; ++j) {
      const AxisSample &sy = samples[1][static_cast<std::size_t>(j)];
      for (int i = 0; i < gout.dims[0]; ++i, ++offset) {
        const AxisSample &sx = samples[0][static_cast<std::size_t>(i)];
        if (sx.frac == 0.0 && sy.frac == 0.0 && sz.frac == 0.0) {
          out[offset] = in.at(sx.lo, sy.lo, sz.lo);
          continue;
        }
        const auto c = [&](int ii, int jj, int kk) { return static_cast<double>(in.at(ii, jj, kk)); };
        const double x0 = c(sx.lo, sy.lo, sz.lo) * (1.0 - sx.frac) + c(sx.hi, sy.lo, sz.lo) * sx.frac;
        const double x1 = c(sx.lo, sy.hi, sz.lo) * (1.0 - sx.frac) + c(sx.hi, sy.hi, sz.lo) * sx.frac;
        const double x2 = c(sx.lo, sy.lo, sz.hi) * (1.0 - sx.frac) + c(sx.hi, sy.lo, sz.hi) * sx.frac;
        const double x3 = c(sx.lo, sy.hi, sz.hi) * (1.0 - sx.frac) + c(sx.hi, sy.hi, sz.hi) * sx.frac;
        const double y0 = x0 * (1.0 - sy.frac) + x1 * sy.frac;
        const double y1 = x2 * (1.0 - sy.frac) + x3 * sy.frac;
        out[offset] = from_interpolated<T>(y0 * (1.0 - sz.frac) + y1 * sz.frac);
      }
    }
  }
  return out;
}

template Grid<float> resample(const Grid<float> &, const Vec3 &, Interpolation);
template Grid<double> resample(const Grid<double> &, const Vec3 &, Interpolation);
template Grid<std::uint8_t> resample(const Grid<std::uint8_t> &, const Vec3 &, Interpolation);

Volume znorm_nonzero(const Volume &vol) {
  double sum = 0.0;
  std::size_t n = 0;
  for (float v : vol.values()) {
    if (v != 0.0f) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) {
    throw Error(Errc::EmptyForeground, "volume has no nonzero voxels");
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (float v : vol.values()) {
    if (v != 0.0f) {
      const double d = v - mean;
      ss += d * d;
    }
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (!(sd > 0.0)) {
    throw Error(Errc::DegenerateIntensity, "nonzero voxels have zero standard deviation");
  }
  Volume out(vol.geometry());
  for (std::size_t o = 0; o < vol.size(); ++o) {
    if (vol[o] != 0.0f) {
      out[o] = static_cast<float>((vol[o] - mean) / sd);
    }
  }
  return out;
}

ComponentLabels label_components(const Mask &m, Connectivity connectivity) {
  const Geometry &g = m.geometry();
  ComponentLabels result{Grid<std::int32_t>(g, 0), {0}};
  const auto offsets = neighbor_offsets(connectivity);
  std::vector<std::size_t> queue;
  std::int32_t next = 1;

  for (std::size_t seed = 0; seed < m.size(); ++seed) {
    if (m[seed] == 0 || result.labels[seed] != 0) {
      continue;
    }
    std::size_t size = 0;
    queue.clear();
    queue.push_back(seed);
    result.labels[seed] = next;
    while (!queue.empty()) {
      const std::size_t cur = queue.back();
      queue.pop_back();
      ++size;
      const VoxelIndex v = g.index(cur);
      for (const auto &d : offsets) {
        const int ni = v.i + d[0], nj = v.j + d[1], nk = v.k + d[2];
        if (!g.contains(ni, nj, nk)) {
          continue;
        }
        const std::size_t nb = g.linear(ni, nj, nk);
        if (m[nb] != 0 && result.labels[nb] == 0) {
          result.labels[nb] = next;
          queue.push_back(nb);
        }
      }
    }
    result.sizes.push_back(size);
    ++next;
  }
  return result;
}

Mask largest_connected_component(const Mask &m, Connectivity connectivity) {
  const ComponentLabels cc = label_components(m, connectivity);
  Mask out(m.geometry());
  if (cc.sizes.size() <= 1) {
    return out;
  }
  // labels are ordered by first voxel, so strict > keeps the earliest on ties
  std::size_t best = 1;
  for (std::size_t l = 2; l < cc.sizes.size(); ++l) {
    if (cc.sizes[l] > cc.sizes[best]) {
      best = l;
    }
  }
  const auto target = static_cast<std::int32_t>(best);
  for (std::size_t o = 0; o < m.size(); ++o) {
    out[o] = cc.labels[o] == target ? 1 : 0;
  }
  return out;
}

BoxPrompt3D bounding_box(const Mask &m) {
  const Geometry &g = m.geometry();
  constexpr int kMax = std::numeric_limits<int>::max();
  VoxelIndex lo{kMax, kMax, kMax};
  VoxelIndex hi{-1, -1, -1};
  std::size_t offset = 0;
  for (int k = 0; k < g.dims[2]; ++k) {
    for (int j = 0; j < g.dims[1]; ++j) {
      for (int i = 0; i < g.dims[0]; ++i, ++offset) {
        if (m[offset] == 0) {
          continue;
        }
        lo = {std::min(lo.i, i), std::min(lo.j, j), std::min(lo.k, k)};
        hi = {std::max(hi.i, i), std::max(hi.j, j), std::max(hi.k, k)};
      }
    }
  }
  if (hi.i < 0) {
    throw Error(Errc::EmptyMask, "bounding box of an empty mask");
  }
  return {lo, hi};
}

Mask binarize(const ProbVolume &p, double threshold) {
  Mask out(p.geometry());
  for (std::size_t o = 0; o < p.size(); ++o) {
    out[o] = p[o] > threshold ? 1 : 0;
  }
  return out;
}

} // namespace rtprompt

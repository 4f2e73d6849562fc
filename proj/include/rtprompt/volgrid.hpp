#pragma once

#include <cstdint>

#include "rtprompt/grid.hpp"

namespace rtprompt {

/// Axis-aligned box given by two opposite voxel corners (inclusive).
struct BoxPrompt3D {
  VoxelIndex corner_min;
  VoxelIndex corner_max;

  bool contains(const VoxelIndex &v) const noexcept {
    return v.i >= corner_min.i && v.i <= corner_max.i && v.j >= corner_min.j && v.j <= corner_max.j &&
           v.k >= corner_min.k && v.k <= corner_max.k;
  }
  /// True when `inner` lies componentwise inside this box.
  bool encloses(const BoxPrompt3D &inner) const noexcept {
    return contains(inner.corner_min) && contains(inner.corner_max);
  }

  friend bool operator==(const BoxPrompt3D &, const BoxPrompt3D &) = default;
};

enum class Interpolation { Trilinear, Nearest };

/// Resamples onto a grid with `target_spacing`, keeping the origin. Output
/// dims are ceil(n * spacing_in / spacing_out) per axis; sample points that
/// fall past the last input voxel clamp to the edge. Mask resampling with
/// Trilinear rounds the interpolated value at 0.5.
template <typename T>
Grid<T> resample(const Grid<T> &in, const Vec3 &target_spacing, Interpolation mode);

extern template Grid<float> resample(const Grid<float> &, const Vec3 &, Interpolation);
extern template Grid<double> resample(const Grid<double> &, const Vec3 &, Interpolation);
extern template Grid<std::uint8_t> resample(const Grid<std::uint8_t> &, const Vec3 &, Interpolation);

/// Z-score over nonzero voxels (population std). Zero voxels stay zero.
/// Throws EmptyForeground for an all-zero volume, DegenerateIntensity when
/// the nonzero voxels have zero variance.
Volume znorm_nonzero(const Volume &vol);

/// Per-voxel component labels (0 = background, components numbered 1.. in
/// order of their first voxel in linear order). Returns the label grid and
/// the voxel count of each component (index 0 unused).
struct ComponentLabels {
  Grid<std::int32_t> labels;
  std::vector<std::size_t> sizes;
};
ComponentLabels label_components(const Mask &m, Connectivity connectivity = Connectivity::TwentySix);

/// Keeps only the largest component. Equal-size ties go to the component
/// whose first voxel has the smallest linear index. Empty in, empty out.
Mask largest_connected_component(const Mask &m, Connectivity connectivity = Connectivity::TwentySix);

/// Componentwise min/max index of the foreground. Throws EmptyMask.
BoxPrompt3D bounding_box(const Mask &m);

/// 1 where p > threshold (strict, so a threshold of 1 always yields an empty mask).
Mask binarize(const ProbVolume &p, double threshold);

} // namespace rtprompt

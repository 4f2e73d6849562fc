#pragma once

// Dense 3D voxel grids shared by every module.
//
// Axis order is x-fastest: the voxel (i, j, k) lives at linear offset
//   i + nx * (j + ny * k)
// in the data buffer. Prompts, masks and file payloads all use this order.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <string>
#include <utility>
#include <vector>

#include "rtprompt/error.hpp"

namespace rtprompt {

using Vec3 = std::array<double, 3>;

struct VoxelIndex {
  int i = 0;
  int j = 0;
  int k = 0;

  friend auto operator<=>(const VoxelIndex &, const VoxelIndex &) = default;
};

struct Geometry {
  std::array<int, 3> dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  std::size_t voxel_count() const noexcept {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }

  bool contains(int i, int j, int k) const noexcept {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }
  bool contains(const VoxelIndex &v) const noexcept { return contains(v.i, v.j, v.k); }

  std::size_t linear(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
  }
  std::size_t linear(const VoxelIndex &v) const noexcept { return linear(v.i, v.j, v.k); }

  VoxelIndex index(std::size_t offset) const noexcept {
    const auto nx = static_cast<std::size_t>(dims[0]);
    const auto ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(offset % nx), static_cast<int>((offset / nx) % ny),
            static_cast<int>(offset / (nx * ny))};
  }

  /// Throws InvalidArgument unless dims are positive and spacing is positive and finite.
  void validate() const;

  friend bool operator==(const Geometry &, const Geometry &) = default;
};

/// Cubic grid of n^3 voxels at the given isotropic spacing.
inline Geometry cube_geometry(int n, double spacing = 1.0) {
  return Geometry{{n, n, n}, {spacing, spacing, spacing}, {0.0, 0.0, 0.0}};
}

template <typename T>
class Grid {
public:
  using value_type = T;

  Grid() = default;

  explicit Grid(Geometry geometry, T fill = T{}) : geometry_(std::move(geometry)) {
    geometry_.validate();
    data_.assign(geometry_.voxel_count(), fill);
  }

  Grid(Geometry geometry, std::vector<T> data) : geometry_(std::move(geometry)), data_(std::move(data)) {
    geometry_.validate();
    if (data_.size() != geometry_.voxel_count()) {
      throw Error(Errc::InvalidArgument, "data length " + std::to_string(data_.size()) +
                                             " does not match grid of " +
                                             std::to_string(geometry_.voxel_count()) + " voxels");
    }
  }

  const Geometry &geometry() const noexcept { return geometry_; }
  const std::array<int, 3> &dims() const noexcept { return geometry_.dims; }
  const Vec3 &spacing() const noexcept { return geometry_.spacing; }
  std::size_t size() const noexcept { return data_.size(); }

  T &operator[](std::size_t offset) noexcept { return data_[offset]; }
  const T &operator[](std::size_t offset) const noexcept { return data_[offset]; }

  T &at(int i, int j, int k) { return data_[geometry_.linear(i, j, k)]; }
  const T &at(int i, int j, int k) const { return data_[geometry_.linear(i, j, k)]; }
  T &at(const VoxelIndex &v) { return data_[geometry_.linear(v)]; }
  const T &at(const VoxelIndex &v) const { return data_[geometry_.linear(v)]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T> &storage() const noexcept { return data_; }

  friend bool operator==(const Grid &, const Grid &) = default;

private:
  Geometry geometry_;
  std::vector<T> data_;
};

/// Image and dose grids (stored as f32 on disk).
using Volume = Grid<float>;
/// Binary 0/1 grids: ground truth, predictions, ROIs, error regions.
using Mask = Grid<std::uint8_t>;
/// Per-voxel probabilities in [0, 1]. Double precision so losses and their
/// gradients can be checked against finite differences.
using ProbVolume = Grid<double>;

enum class Connectivity { Six = 6, Eighteen = 18, TwentySix = 26 };

/// Parses 6, 18 or 26; anything else is InvalidArgument.
Connectivity connectivity_from_int(int value);

/// Neighbour offsets (excluding the centre) for the given connectivity.
std::span<const std::array<int, 3>> neighbor_offsets(Connectivity c);

/// Throws GridMismatch when the two geometries differ.
void require_same_grid(const Geometry &a, const Geometry &b, std::string_view what);

/// Number of voxels set to 1.
std::size_t count(const Mask &m);

} // namespace rtprompt

#include "rtprompt/grid.hpp"

#include <algorithm>
#include <cmath>

namespace rtprompt {

namespace {

template <int N>
constexpr auto make_offsets() {
  std::array<std::array<int, 3>, N> out{};
  int n = 0;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int order = std::abs(dx) + std::abs(dy) + std::abs(dz);
        const int max_order = N == 6 ? 1 : N == 18 ? 2 : 3;
        if (order == 0 || order > max_order) {
          continue;
        }
        out[n++] = {dx, dy, dz};
      }
    }
  }
  return out;
}

constexpr auto kOffsets6 = make_offsets<6>();
constexpr auto kOffsets18 = make_offsets<18>();
constexpr auto kOffsets26 = make_offsets<26>();

} // namespace

void Geometry::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) {
      throw Error(Errc::InvalidArgument, "grid dims must be positive");
    }
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw Error(Errc::InvalidArgument, "grid spacing must be positive and finite");
    }
    if (!std::isfinite(origin[a])) {
      throw Error(Errc::InvalidArgument, "grid origin must be finite");
    }
  }
}

Connectivity connectivity_from_int(int value) {
  switch (value) {
  case 6: return Connectivity::Six;
  case 18: return Connectivity::Eighteen;
  case 26: return Connectivity::TwentySix;
  default: throw Error(Errc::InvalidArgument, "connectivity must be 6, 18 or 26, got " + std::to_string(value));
  }
}

std::span<const std::array<int, 3>> neighbor_offsets(Connectivity c) {
  switch (c) {
  case Connectivity::Six: return kOffsets6;
  case Connectivity::Eighteen: return kOffsets18;
  case Connectivity::TwentySix: return kOffsets26;
  }
  return kOffsets26;
}

void require_same_grid(const Geometry &a, const Geometry &b, std::string_view what) {
  if (!(a == b)) {
    throw Error(Errc::GridMismatch, std::string(what) + ": grids differ in dims, spacing or origin");
  }
}

std::size_t count(const Mask &m) {
  return static_cast<std::size_t>(std::count_if(m.values().begin(), m.values().end(), [](std::uint8_t v) { return v != 0; }));
}

} // namespace rtprompt

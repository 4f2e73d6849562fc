#include <cmath>

#include "helpers.hpp"
#include "rtprompt/volgrid.hpp"

using namespace rtprompt;

TEST_CASE("linear offset is x-fastest") {
  const Geometry g{{3, 4, 5}, {1, 1, 1}, {0, 0, 0}};
  CHECK(g.linear(1, 0, 0) == 1);
  CHECK(g.linear(0, 1, 0) == 3);
  CHECK(g.linear(0, 0, 1) == 12);
  for (std::size_t o = 0; o < g.voxel_count(); ++o) CHECK(g.linear(g.index(o)) == o);
}

TEST_CASE("grid rejects bad geometry and data length") {
  CHECK_ERRC(Volume(Geometry{{0, 1, 1}}), Errc::InvalidArgument);
  CHECK_ERRC(Volume(Geometry{{1, 1, 1}, {1, -1, 1}}), Errc::InvalidArgument);
  CHECK_ERRC(Volume(cube_geometry(2), std::vector<float>(7)), Errc::InvalidArgument);
}

TEST_CASE("resample to own spacing is a bit-identical copy") {
  SeededRng rng(3);
  Volume v(Geometry{{5, 4, 3}, {0.7, 1.3, 2.9}, {0, 0, 0}});
  for (auto &x : v.values()) x = static_cast<float>(rng.normal() * 100.0);
  CHECK(resample(v, v.spacing(), Interpolation::Trilinear) == v);
  CHECK(resample(v, v.spacing(), Interpolation::Nearest) == v);
}

TEST_CASE("resample dims follow the physical extent") {
  const Volume v(cube_geometry(4, 2.0), 1.0f);
  const Volume up = resample(v, {1.0, 1.0, 1.0}, Interpolation::Trilinear);
  CHECK(up.dims() == std::array<int, 3>{8, 8, 8});
  CHECK(up.spacing() == Vec3{1.0, 1.0, 1.0});
  const Volume aniso = resample(Volume(Geometry{{10, 10, 3}, {1, 1, 3}}), {2.0, 1.0, 1.0}, Interpolation::Nearest);
  CHECK(aniso.dims() == std::array<int, 3>{5, 10, 9});
}

TEST_CASE("resample of a constant field stays constant") {
  const Volume v(Geometry{{7, 5, 6}, {1.1, 0.9, 2.0}}, 42.5f);
  for (const Vec3 &t : {Vec3{0.3, 0.7, 1.9}, Vec3{2.5, 2.5, 2.5}, Vec3{1.0, 1.0, 0.5}}) {
    for (Interpolation mode : {Interpolation::Trilinear, Interpolation::Nearest}) {
      const Volume out = resample(v, t, mode);
      for (float x : out.values()) CHECK(x == doctest::Approx(42.5).epsilon(1e-6));
    }
  }
}

TEST_CASE("trilinear upsampling interpolates a ramp") {
  Volume v(Geometry{{3, 1, 1}, {2, 1, 1}});
  v[0] = 0;
  v[1] = 10;
  v[2] = 20;
  const Volume up = resample(v, {1.0, 1.0, 1.0}, Interpolation::Trilinear);
  REQUIRE(up.dims()[0] == 6);
  const float expect[6] = {0, 5, 10, 15, 20, 20}; // last sample clamps to the edge
  for (int i = 0; i < 6; ++i) CHECK(up.at(i, 0, 0) == doctest::Approx(expect[i]));
}

TEST_CASE("resample keeps masks binary") {
  SeededRng rng(9);
  const Mask m = testing::random_mask(cube_geometry(6), 0.4, rng);
  for (Interpolation mode : {Interpolation::Trilinear, Interpolation::Nearest}) {
    const Mask out = resample(m, {0.6, 1.7, 0.9}, mode);
    for (auto x : out.values()) CHECK((x == 0 || x == 1));
  }
}

TEST_CASE("resample rejects non-positive spacing") {
  const Volume v(cube_geometry(2));
  CHECK_ERRC(resample(v, {0.0, 1.0, 1.0}, Interpolation::Trilinear), Errc::InvalidSpacing);
  CHECK_ERRC(resample(v, {1.0, -2.0, 1.0}, Interpolation::Nearest), Errc::InvalidSpacing);
}

TEST_CASE("znorm over nonzero voxels") {
  Volume v(cube_geometry(3));
  v[4] = 2.0f;
  v[9] = 4.0f;
  const Volume z = znorm_nonzero(v);
  CHECK(z[4] == doctest::Approx(-1.0));
  CHECK(z[9] == doctest::Approx(1.0));
  for (std::size_t o = 0; o < z.size(); ++o) {
    if (o != 4 && o != 9) CHECK(z[o] == 0.0f);
  }
  CHECK_ERRC(znorm_nonzero(Volume(cube_geometry(3))), Errc::EmptyForeground);
  Volume flat(cube_geometry(3));
  flat[1] = flat[2] = flat[5] = 7.0f;
  CHECK_ERRC(znorm_nonzero(flat), Errc::DegenerateIntensity);
}

TEST_CASE("largest component keeps the bigger blob") {
  Mask m(Geometry{{12, 1, 1}});
  for (int i = 0; i < 3; ++i) m.at(i, 0, 0) = 1;
  for (int i = 5; i < 10; ++i) m.at(i, 0, 0) = 1;
  const Mask out = largest_connected_component(m, Connectivity::Six);
  CHECK(count(out) == 5);
  CHECK(out.at(5, 0, 0) == 1);
  CHECK(out.at(0, 0, 0) == 0);

  Mask one(cube_geometry(4));
  one.at(1, 1, 1) = one.at(1, 2, 1) = one.at(2, 2, 1) = 1;
  CHECK(largest_connected_component(one) == one);
  CHECK(count(largest_connected_component(Mask(cube_geometry(3)))) == 0);
}

TEST_CASE("diagonal voxels: 26 joins them, 6 keeps the first") {
  Mask m(Geometry{{2, 2, 1}});
  m.at(0, 0, 0) = 1;
  m.at(1, 1, 0) = 1;
  CHECK(count(largest_connected_component(m, Connectivity::TwentySix)) == 2);
  CHECK(count(largest_connected_component(m, Connectivity::Eighteen)) == 2);
  const Mask six = largest_connected_component(m, Connectivity::Six);
  CHECK(count(six) == 1);
  CHECK(six.at(0, 0, 0) == 1);
}

TEST_CASE("18 vs 26 connectivity on a corner contact") {
  Mask m(Geometry{{2, 2, 2}});
  m.at(0, 0, 0) = 1;
  m.at(1, 1, 1) = 1;
  CHECK(label_components(m, Connectivity::TwentySix).sizes.size() == 2);
  CHECK(label_components(m, Connectivity::Eighteen).sizes.size() == 3);
}

TEST_CASE("bounding box corners") {
  Mask m(Geometry{{8, 8, 4}});
  for (int i = 2; i <= 4; ++i)
    for (int j = 3; j <= 5; ++j) m.at(i, j, 1) = 1;
  CHECK(bounding_box(m) == BoxPrompt3D{{2, 3, 1}, {4, 5, 1}});

  Mask single(Geometry{{9, 2, 3}});
  single.at(7, 0, 2) = 1;
  CHECK(bounding_box(single) == BoxPrompt3D{{7, 0, 2}, {7, 0, 2}});

  const Mask full(Geometry{{3, 4, 5}}, 1);
  CHECK(bounding_box(full) == BoxPrompt3D{{0, 0, 0}, {2, 3, 4}});
  CHECK_ERRC(bounding_box(Mask(cube_geometry(3))), Errc::EmptyMask);
}

TEST_CASE("binarize is strict") {
  ProbVolume p(Geometry{{4, 1, 1}});
  p[0] = 0.2;
  p[1] = 0.5;
  p[2] = 0.51;
  p[3] = 1.0;
  const Mask m = binarize(p, 0.5);
  CHECK(m[0] == 0);
  CHECK(m[1] == 0);
  CHECK(m[2] == 1);
  CHECK(m[3] == 1);
  CHECK(count(binarize(p, 1.0)) == 0);
}

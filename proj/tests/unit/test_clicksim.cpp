#include <set>

#include "helpers.hpp"
#include "rtprompt/clicksim.hpp"

using namespace rtprompt;

TEST_CASE("error regions") {
  Mask gt(Geometry{{7, 1, 1}});
  for (int i = 1; i <= 5; ++i) gt.at(i, 0, 0) = 1;
  const ErrorRegions same = error_regions(gt, gt);
  CHECK(count(same.fn) == 0);
  CHECK(count(same.fp) == 0);

  const ErrorRegions none = error_regions(Mask(gt.geometry()), gt);
  CHECK(none.fn == gt);
  CHECK(count(none.fp) == 0);

  // bar shifted by one voxel
  Mask pred(gt.geometry());
  for (int i = 2; i <= 6; ++i) pred.at(i, 0, 0) = 1;
  const ErrorRegions shift = error_regions(pred, gt);
  CHECK(count(shift.fn) == 1);
  CHECK(shift.fn.at(1, 0, 0) == 1);
  CHECK(count(shift.fp) == 1);
  CHECK(shift.fp.at(6, 0, 0) == 1);

  CHECK_ERRC(error_regions(Mask(cube_geometry(2)), Mask(cube_geometry(3))), Errc::GridMismatch);
}

TEST_CASE("sample clicks: empty union") {
  SeededRng rng(1);
  const Mask empty(cube_geometry(4));
  CHECK(sample_clicks(empty, empty, 4, rng).empty());
}

TEST_CASE("sample clicks: two-voxel union") {
  Mask fn(cube_geometry(3)), fp(cube_geometry(3));
  fn.at(0, 1, 2) = 1;
  fp.at(2, 2, 0) = 1;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SeededRng rng(seed);
    const auto clicks = sample_clicks(fn, fp, 2, rng);
    REQUIRE(clicks.size() == 2);
    std::set<std::pair<VoxelIndex, Polarity>> got;
    for (const Click &c : clicks) got.insert({c.pos, c.polarity});
    CHECK(got == std::set<std::pair<VoxelIndex, Polarity>>{{{0, 1, 2}, Polarity::Positive},
                                                           {{2, 2, 0}, Polarity::Negative}});
  }
}

TEST_CASE("sample clicks: fn only, distinct, capped") {
  Mask fn(cube_geometry(5)), fp(cube_geometry(5));
  for (int i = 0; i < 10; ++i) fn[static_cast<std::size_t>(i * 7)] = 1;
  SeededRng rng(8);
  const auto clicks = sample_clicks(fn, fp, 4, rng);
  CHECK(clicks.size() == 4);
  std::set<VoxelIndex> seen;
  for (const Click &c : clicks) {
    CHECK(c.polarity == Polarity::Positive);
    CHECK(fn.at(c.pos) == 1);
    seen.insert(c.pos);
  }
  CHECK(seen.size() == 4);
  CHECK(sample_clicks(fn, fp, 50, rng).size() == 10);
}

TEST_CASE("same seed, same clicks") {
  SeededRng r0(3);
  const Mask fn = testing::random_mask(cube_geometry(6), 0.2, r0);
  const Mask fp = testing::random_mask(cube_geometry(6), 0.1, r0);
  Mask fp_only(fp.geometry());
  for (std::size_t o = 0; o < fp.size(); ++o) fp_only[o] = fp[o] && !fn[o];
  SeededRng a(99), b(99);
  const auto ca = sample_clicks(fn, fp_only, 6, a);
  const auto cb = sample_clicks(fn, fp_only, 6, b);
  CHECK(ca == cb);
}

TEST_CASE("refine round") {
  Mask gt(cube_geometry(4));
  gt.at(1, 1, 1) = gt.at(2, 1, 1) = gt.at(2, 2, 1) = 1;
  ProbVolume perfect(gt.geometry());
  for (std::size_t o = 0; o < gt.size(); ++o) perfect[o] = gt[o];
  SeededRng rng(4);
  CHECK(refine_round(perfect, gt, 0.5, 4, rng).empty());

  const ProbVolume zero(gt.geometry(), 0.0);
  const auto clicks = refine_round(zero, gt, 0.5, 4, rng);
  CHECK(clicks.size() == 3);
  for (const Click &c : clicks) {
    CHECK(c.polarity == Polarity::Positive);
    CHECK(gt.at(c.pos) == 1);
  }
  CHECK_ERRC(refine_round(zero, gt, 0.0, 4, rng), Errc::InvalidArgument);
  CHECK_ERRC(refine_round(zero, gt, 1.0, 4, rng), Errc::InvalidArgument);
}

TEST_CASE("scripted improving predictor only clicks on current errors") {
  Mask gt(cube_geometry(6));
  for (int i = 1; i < 5; ++i)
    for (int j = 1; j < 5; ++j) gt.at(i, j, 2) = 1;
  SeededRng rng(12);
  ProbVolume p(gt.geometry(), 0.0);
  for (int round = 0; round < 3; ++round) {
    // the predictor fills one more row of the gt each round, plus a fading false positive
    for (int i = 1; i < 5; ++i) p.at(i, 1 + round, 2) = 0.9;
    p.at(0, 0, 0) = round < 2 ? 0.8 : 0.1;
    const Mask pred = [&] {
      Mask m(p.geometry());
      for (std::size_t o = 0; o < p.size(); ++o) m[o] = p[o] > 0.5;
      return m;
    }();
    for (const Click &c : refine_round(p, gt, 0.5, 4, rng)) {
      if (c.polarity == Polarity::Positive) {
        CHECK((gt.at(c.pos) == 1 && pred.at(c.pos) == 0));
      } else {
        CHECK((gt.at(c.pos) == 0 && pred.at(c.pos) == 1));
      }
    }
  }
}

TEST_CASE("schedule validation") {
  CHECK_NOTHROW(ClickSchedule{}.validate());
  CHECK_NOTHROW((ClickSchedule{0, 4, true}.validate()));
  CHECK_ERRC((ClickSchedule{-1, 4, true}.validate()), Errc::InvalidArgument);
  CHECK_ERRC((ClickSchedule{3, 0, true}.validate()), Errc::InvalidArgument);
}

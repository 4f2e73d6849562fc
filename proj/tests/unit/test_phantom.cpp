#include <cmath>

#include "helpers.hpp"
#include "rtprompt/doseprompt.hpp"
#include "rtprompt/phantom.hpp"
#include "rtprompt/volgrid.hpp"

using namespace rtprompt;

TEST_CASE("phantoms are deterministic and satisfy the construction") {
  for (Task task : {Task::ORN, Task::CE, Task::CRN}) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const PhantomSpec spec = default_phantom_spec(task, seed);
      const PhantomCase c = generate_case(spec);
      CHECK(c == generate_case(spec));
      CHECK(c.text.task == task);

      const double dmax = max_positive_dose(c.dose);
      const std::size_t lesion = count(c.gt);
      CHECK(lesion > 0);
      CHECK(static_cast<double>(lesion) < 0.02 * static_cast<double>(c.gt.size()));
      for (std::size_t o = 0; o < c.gt.size(); ++o) {
        if (c.gt[o]) CHECK(c.dose[o] >= 0.6 * dmax);
      }
      CHECK_NOTHROW(derive_dose_prompt(c.dose));
      CHECK_NOTHROW(znorm_nonzero(c.image));
    }
  }
  CHECK_FALSE(generate_case(default_phantom_spec(Task::CE, 1)) == generate_case(default_phantom_spec(Task::CE, 2)));
}

TEST_CASE("infeasible specs") {
  PhantomSpec s = default_phantom_spec(Task::ORN, 1);
  s.lesion_radius_min_mm = 30.0;
  s.lesion_radius_max_mm = 40.0;
  CHECK_ERRC(generate_case(s), Errc::InfeasibleSpec);
  s = default_phantom_spec(Task::ORN, 1);
  s.lesion_dose_fraction = 1.5;
  CHECK_ERRC(generate_case(s), Errc::InfeasibleSpec);
}

TEST_CASE("dataset helper") {
  const auto a = generate_dataset(Task::CRN, 3, 5);
  REQUIRE(a.size() == 3);
  CHECK(a[1] == generate_case(default_phantom_spec(Task::CRN, phantom_case_seed(5, 1))));
  CHECK_FALSE(a[0] == a[1]);
}

TEST_CASE("flip twice on the same axis is the identity") {
  const PhantomCase c = generate_case(default_phantom_spec(Task::CE, 3));
  for (int axis = 0; axis < 3; ++axis) {
    CHECK_FALSE(flip(c, axis) == c);
    CHECK(flip(flip(c, axis), axis) == c);
  }
  CHECK_ERRC(flip(c, 3), Errc::InvalidArgument);
}

TEST_CASE("augmentation is seeded") {
  const PhantomCase c = generate_case(default_phantom_spec(Task::ORN, 4));
  SeededRng a(10), b(10), other(11);
  const PhantomCase x = augment(c, a);
  CHECK(x == augment(c, b));
  CHECK_FALSE(x == augment(c, other));
  for (auto v : x.gt.values()) CHECK((v == 0 || v == 1));
}

TEST_CASE("intensity-only augmentation leaves gt and dose alone") {
  const PhantomCase c = generate_case(default_phantom_spec(Task::CRN, 8));
  for (std::uint64_t s = 0; s < 5; ++s) {
    SeededRng rng(s);
    const PhantomCase x = augment(c, rng, AugmentConfig::intensity_only());
    CHECK(x.gt == c.gt);
    CHECK(x.dose == c.dose);
    CHECK(x.text == c.text);
  }
}

TEST_CASE("rigid augmentation keeps lesion volume within 15%") {
  AugmentConfig rigid;
  rigid.noise = rigid.blur = rigid.gamma = false;
  rigid.scale_min = rigid.scale_max = 1.0;
  for (Task task : {Task::ORN, Task::CE, Task::CRN}) {
    const PhantomCase c = generate_case(default_phantom_spec(task, 2));
    const double base = static_cast<double>(count(c.gt));
    double worst = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      SeededRng rng(s);
      const PhantomCase x = augment(c, rng, rigid);
      worst = std::max(worst, std::abs(static_cast<double>(count(x.gt)) - base) / base);
    }
    CHECK(worst <= 0.15);
  }
}

TEST_CASE("full affine range keeps a non-empty binary lesion") {
  AugmentConfig geo;
  geo.noise = geo.blur = geo.gamma = false;
  const PhantomCase c = generate_case(default_phantom_spec(Task::CE, 6));
  for (std::uint64_t s = 0; s < 100; ++s) {
    SeededRng rng(s);
    const PhantomCase x = augment(c, rng, geo);
    CHECK(count(x.gt) > 0);
    CHECK(x.gt.geometry() == c.gt.geometry());
  }
}

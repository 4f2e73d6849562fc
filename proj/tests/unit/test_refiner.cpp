#include <cmath>

#include "helpers.hpp"
#include "rtprompt/phantom.hpp"
#include "rtprompt/refiner.hpp"

using namespace rtprompt;

namespace {

struct Small {
  Volume image, dose;
};

Small small_case() {
  const Geometry g = cube_geometry(10);
  Small s{Volume(g), Volume(g)};
  SeededRng rng(1);
  for (auto &v : s.image.values()) v = static_cast<float>(100 + 10 * rng.normal());
  for (int k = 0; k < 10; ++k)
    for (int j = 0; j < 10; ++j)
      for (int i = 0; i < 10; ++i)
        s.dose.at(i, j, k) = static_cast<float>(60 * std::exp(-0.1 * ((i - 5) * (i - 5) + (j - 5) * (j - 5) + (k - 5) * (k - 5))));
  return s;
}

std::vector<Case> tiny_dataset() {
  std::vector<Case> cases;
  for (Task t : {Task::ORN, Task::CE, Task::CRN}) {
    for (auto &c : generate_dataset(t, 2, 77)) cases.push_back(std::move(c));
  }
  return cases;
}

} // namespace

TEST_CASE("feature channels") {
  const Small s = small_case();
  const BoxPrompt3D box{{3, 3, 3}, {6, 6, 6}};
  const FeatureGrid none = featurize_case(s.image, s.dose, box, {}, 2.0);
  for (const FeatureVector &f : none.values) {
    CHECK(f[kPositiveClick] == 0.0);
    CHECK(f[kNegativeClick] == 0.0);
    CHECK(f[kBias] == 1.0);
    CHECK(f[kBoxDecay] > 0.0);
    CHECK(f[kBoxDecay] <= 1.0);
  }
  const Geometry &g = none.geometry;
  CHECK(none.values[g.linear(4, 4, 4)][kInsideBox] == 1.0);
  CHECK(none.values[g.linear(4, 4, 4)][kBoxDecay] == 1.0);
  // 2 mm outside the box face, s = 2
  CHECK(none.values[g.linear(8, 4, 4)][kInsideBox] == 0.0);
  CHECK(none.values[g.linear(8, 4, 4)][kBoxDecay] == doctest::Approx(std::exp(-1.0)));
  CHECK(none.values[g.linear(5, 5, 5)][kDose] == doctest::Approx(1.0));

  const std::vector<Click> clicks{{{1, 2, 3}, Polarity::Positive}, {{8, 8, 8}, Polarity::Negative}};
  const FeatureGrid with = featurize_case(s.image, s.dose, box, clicks, 2.0);
  CHECK(with.values[g.linear(1, 2, 3)][kPositiveClick] == 1.0);
  CHECK(with.values[g.linear(8, 8, 8)][kNegativeClick] == 1.0);
  CHECK(with.values[g.linear(1, 2, 5)][kPositiveClick] == doctest::Approx(std::exp(-1.0)));
  CHECK(with.values[g.linear(1, 2, 3)][kNegativeClick] > 0.0);

  const std::vector<Click> outside{{{10, 0, 0}, Polarity::Positive}};
  CHECK_ERRC(featurize_case(s.image, s.dose, box, outside), Errc::InvalidArgument);
  CHECK_ERRC(featurize_case(s.image, Volume(cube_geometry(9), 1.0f), box, {}), Errc::GridMismatch);
  CHECK_ERRC(featurize_case(s.image, Volume(cube_geometry(10)), box, {}), Errc::NoDose);
}

TEST_CASE("predict") {
  const Small s = small_case();
  const BoxPrompt3D box{{3, 3, 3}, {6, 6, 6}};
  const FeatureGrid f = featurize_case(s.image, s.dose, box, {});
  const TaskEmbedding orn = featurize_text({Task::ORN, {}, {}});
  for (double p : predict(RefinerModel{}, orn, f).values()) CHECK(p == 0.5);

  RefinerModel inside;
  inside.shared_weights[kInsideBox] = 10.0;
  const ProbVolume p = predict(inside, orn, f);
  for (std::size_t o = 0; o < p.size(); ++o) {
    if (f.values[o][kInsideBox] == 1.0) {
      CHECK(p[o] > 0.999);
    } else {
      CHECK(p[o] == 0.5);
    }
  }

  RefinerModel tasks;
  tasks.task_weights[static_cast<std::size_t>(Task::CE)][kIntensity] = 2.0;
  const TaskEmbedding ce = featurize_text({Task::CE, {}, {}});
  CHECK_FALSE(predict(tasks, ce, f) == predict(tasks, orn, f));
}

TEST_CASE("box prior starting model") {
  const RefinerModel m = box_prior_model(10.0);
  CHECK(m.shared_weights[kBias] == -10.0);
  CHECK(m.shared_weights[kInsideBox] == 10.0);
  CHECK(m.effective_weights(Task::CE) == m.shared_weights);
}

TEST_CASE("training: no-op update, determinism, progress") {
  const std::vector<Case> cases = tiny_dataset();
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  const RefinerModel init = box_prior_model();
  CHECK(train(cases, cfg, init).model == init);

  cfg.epochs = 6;
  cfg.learning_rate = 0.5;
  const TrainResult a = train(cases, cfg);
  const TrainResult b = train(cases, cfg);
  CHECK(a.model == b.model);
  CHECK(a.epoch_loss == b.epoch_loss);
  REQUIRE(a.epoch_loss.size() == 6);
  CHECK(a.epoch_loss.back() < a.epoch_loss.front());

  for (const FeatureVector *w : {&a.model.shared_weights, &a.model.task_weights[0], &a.model.task_weights[2]}) {
    CHECK((*w)[kPositiveClick] >= 0.0);
    CHECK((*w)[kNegativeClick] <= 0.0);
  }

  TrainConfig other = cfg;
  other.seed = 12;
  CHECK_FALSE(train(cases, other).model == a.model);
  other = cfg;
  other.clicks.accumulate = false;
  CHECK_FALSE(train(cases, other).model == a.model);
  other = cfg;
  other.clicks.iterations = 0;
  const TrainResult noclick = train(cases, other);
  CHECK(noclick.model.shared_weights[kPositiveClick] == 0.0);
  CHECK(noclick.model.shared_weights[kNegativeClick] == 0.0);
}

TEST_CASE("training preconditions") {
  std::vector<Case> cases = tiny_dataset();
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_ERRC(train(cases, cfg), Errc::InvalidArgument);
  cfg.epochs = 1;
  CHECK_ERRC(train(std::span<const Case>{}, cfg), Errc::InvalidArgument);
  cases[1].dose = Volume(cases[1].dose.geometry());
  CHECK_ERRC(train(cases, cfg), Errc::NoDose);
}

TEST_CASE("inference") {
  const std::vector<Case> cases = tiny_dataset();
  TrainConfig cfg;
  cfg.epochs = 4;
  const RefinerModel m = train(cases, cfg).model;
  const Case &c = cases[3];
  const Mask mask = infer(m, c.image, c.dose, c.text, cfg);
  const BoxPrompt3D box = dose_guided_box(c.dose, cfg.dose);
  CHECK(count(mask) > 0);
  for (std::size_t o = 0; o < mask.size(); ++o) {
    if (mask[o]) CHECK(box.contains(mask.geometry().index(o)));
  }
  TrainConfig strict = cfg;
  strict.prediction_threshold = 1.0;
  CHECK(count(infer(m, c.image, c.dose, c.text, strict)) == 0);
  CHECK_ERRC(infer(m, c.image, Volume(c.dose.geometry()), c.text, cfg), Errc::NoDose);
}

TEST_CASE("model json") {
  RefinerModel m = box_prior_model(3.5);
  m.task_weights[1][kDose] = -0.25;
  const auto j = to_json(m);
  CHECK(j["feature_spec_version"] == kFeatureSpecVersion);
  CHECK(model_from_json(j) == m);
  CHECK(model_from_json(nlohmann::json::parse(j.dump())) == m);

  auto bad = j;
  bad["feature_spec_version"] = kFeatureSpecVersion + 1;
  CHECK_ERRC(model_from_json(bad), Errc::FormatError);
  bad = j;
  bad["shared_weights"] = {1, 2, 3};
  CHECK_ERRC(model_from_json(bad), Errc::FormatError);
  bad = j;
  bad["task_weights"].erase("CRN");
  CHECK_ERRC(model_from_json(bad), Errc::FormatError);
  CHECK_ERRC(model_from_json(nlohmann::json::array()), Errc::FormatError);
}

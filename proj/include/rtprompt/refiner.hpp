#pragma once

// Prompt-conditioned voxel classifier.
//
// Each voxel gets a 7-channel feature vector built from the image and the
// three prompt types:
//
//   0 intensity        image after nonzero-voxel z-scoring
//   1 dose             dose / D_max
//   2 inside_box       1 inside the dose-guided box, else 0
//   3 box_decay        exp(-d_box / s), d_box = mm distance to the box (0 inside)
//   4 positive_click   exp(-d_pos / s), d_pos = mm distance to nearest positive click
//   5 negative_click   exp(-d_neg / s), likewise for negative clicks
//   6 bias             1
//
// Click channels are 0 when no click of that polarity exists. The model is
// p(v) = sigmoid((shared + task_weights[task]) . f(v)), trained with the STF
// loss under the click-refinement schedule.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "rtprompt/case.hpp"
#include "rtprompt/clicksim.hpp"
#include "rtprompt/doseprompt.hpp"
#include "rtprompt/stf_loss.hpp"
#include "rtprompt/textprompt.hpp"

namespace rtprompt {

inline constexpr std::size_t kFeatureCount = 7;
inline constexpr int kFeatureSpecVersion = 1;

enum FeatureChannel : std::size_t {
  kIntensity = 0,
  kDose = 1,
  kInsideBox = 2,
  kBoxDecay = 3,
  kPositiveClick = 4,
  kNegativeClick = 5,
  kBias = 6,
};

using FeatureVector = std::array<double, kFeatureCount>;

struct FeatureGrid {
  Geometry geometry;
  double decay_scale_mm = 4.0;
  std::vector<FeatureVector> values;
};

/// Throws GridMismatch when image and dose disagree, InvalidArgument for
/// s <= 0, and NoDose / EmptyForeground from the normalisations.
FeatureGrid featurize_case(const Volume &image, const Volume &dose, const BoxPrompt3D &box,
                           std::span<const Click> clicks, double decay_scale_mm = 4.0);

/// Recomputes only the two click channels.
void set_click_features(FeatureGrid &features, std::span<const Click> clicks);

struct RefinerModel {
  FeatureVector shared_weights{};
  std::array<FeatureVector, kTaskCount> task_weights{};

  FeatureVector effective_weights(Task task) const noexcept;

  friend bool operator==(const RefinerModel &, const RefinerModel &) = default;
};

inline constexpr double kDefaultBoxPrior = 10.0;

/// Starting point for training: bias -strength, inside_box +strength, all
/// else 0. Voxels outside the box start (and, since the ROI lies inside the
/// box, stay) strongly negative.
RefinerModel box_prior_model(double strength = kDefaultBoxPrior);

double logit(const FeatureVector &w, const FeatureVector &f) noexcept;
double sigmoid(double x) noexcept;

ProbVolume predict(const RefinerModel &model, const TaskEmbedding &emb, const FeatureGrid &features);

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 100;
  ClickSchedule clicks{};
  LossParams loss{};
  DosePromptConfig dose{};
  std::uint64_t seed = 11;
  double prediction_threshold = 0.5;
  double decay_scale_mm = 4.0;
  /// Keep the effective positive-click weight >= 0 and negative-click weight
  /// <= 0 (projected after every update).
  bool constrain_click_signs = true;

  void validate() const;
};

struct TrainResult {
  RefinerModel model;
  /// Case- and round-averaged STF loss per epoch, evaluated before that epoch's update.
  std::vector<double> epoch_loss;
};

/// Full-batch gradient descent. Per case, the box and ROI are derived once.
/// Every epoch runs round 0 without clicks, then `clicks.iterations` rounds
/// of predict -> binarize -> simulate clicks -> re-featurize; the STF loss
/// gradient is averaged over rounds and cases. Deterministic given the seed.
/// Throws NoDose, InvalidArgument, or TrainingDiverged on a non-finite loss.
TrainResult train(std::span<const Case> cases, const TrainConfig &cfg,
                  const RefinerModel &initial = box_prior_model());

/// Probability map from text + box prompts. Clicks are a training-time
/// mechanism; `clicks` defaults to none and exists for manual experiments.
ProbVolume infer_probability(const RefinerModel &model, const Volume &image, const Volume &dose,
                             const TextPromptRecord &text, const TrainConfig &cfg,
                             std::span<const Click> clicks = {});

/// infer_probability binarized at cfg.prediction_threshold.
Mask infer(const RefinerModel &model, const Volume &image, const Volume &dose, const TextPromptRecord &text,
           const TrainConfig &cfg, std::span<const Click> clicks = {});

nlohmann::json to_json(const RefinerModel &model);
/// Throws FormatError on a malformed model document or a version mismatch.
RefinerModel model_from_json(const nlohmann::json &j);

} // namespace rtprompt

#include "rtprompt/refiner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rtprompt/volgrid.hpp"

namespace rtprompt {

using nlohmann::json;

namespace {

// Per-axis mm gap between voxel index `v` and the inclusive range [lo, hi].
double axis_gap(int v, int lo, int hi, double spacing) {
  if (v < lo) {
    return (lo - v) * spacing;
  }
  if (v > hi) {
    return (v - hi) * spacing;
  }
  return 0.0;
}

struct PreparedCase {
  FeatureGrid features;
  const Mask *gt = nullptr;
  TaskEmbedding embedding;
  std::vector<std::size_t> roi_offsets;
  std::vector<std::uint8_t> roi_labels;
  // squared mm distance to the nearest click of each polarity
  std::vector<double> pos_d2;
  std::vector<double> neg_d2;
};

struct CaseGradient {
  FeatureVector grad{};
  double loss = 0.0;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

void clear_clicks(PreparedCase &pc) {
  std::fill(pc.pos_d2.begin(), pc.pos_d2.end(), kInf);
  std::fill(pc.neg_d2.begin(), pc.neg_d2.end(), kInf);
  for (FeatureVector &f : pc.features.values) {
    f[kPositiveClick] = 0.0;
    f[kNegativeClick] = 0.0;
  }
}

// Folds new clicks into the nearest-click distances; channels are only
// recomputed where the minimum changed, giving the same values as a full
// set_click_features over the accumulated clicks.
void add_clicks(PreparedCase &pc, std::span<const Click> clicks) {
  const Geometry &g = pc.features.geometry;
  const double s = pc.features.decay_scale_mm;
  for (const Click &c : clicks) {
    const bool positive = c.polarity == Polarity::Positive;
    std::vector<double> &best = positive ? pc.pos_d2 : pc.neg_d2;
    const std::size_t channel = positive ? kPositiveClick : kNegativeClick;
    std::size_t offset = 0;
    for (int k = 0; k < g.dims[2]; ++k) {
      const double dz = (k - c.pos.k) * g.spacing[2];
      for (int j = 0; j < g.dims[1]; ++j) {
        const double dy = (j - c.pos.j) * g.spacing[1];
        for (int i = 0; i < g.dims[0]; ++i, ++offset) {
          const double dx = (i - c.pos.i) * g.spacing[0];
          const double d2 = dx * dx + dy * dy + dz * dz;
          if (d2 < best[offset]) {
            best[offset] = d2;
            pc.features.values[offset][channel] = std::exp(-std::sqrt(d2) / s);
          }
        }
      }
    }
  }
}

// Same decision as binarize(sigmoid(z), 0.5) without evaluating the sigmoid
// away from the boundary.
bool above_half(double z) noexcept {
  if (std::abs(z) > 1e-6) {
    return z > 0.0;
  }
  return sigmoid(z) > 0.5;
}

CaseGradient case_gradient(PreparedCase &pc, const RefinerModel &model, const TrainConfig &cfg, SeededRng &rng) {
  CaseGradient out;
  const FeatureVector w = model.effective_weights(pc.embedding.task());
  clear_clicks(pc);
  const int rounds = cfg.clicks.iterations + 1;
  const std::size_t n_roi = pc.roi_offsets.size();
  std::vector<double> p_roi(n_roi), g_roi(n_roi);
  Mask pred(pc.features.geometry);
  for (int round = 0; round < rounds; ++round) {
    for (std::size_t n = 0; n < n_roi; ++n) {
      p_roi[n] = sigmoid(logit(w, pc.features.values[pc.roi_offsets[n]]));
    }
    out.loss += stf_compact(p_roi, pc.roi_labels, cfg.loss, g_roi).stf;
    // chain rule through the logistic: dp/dz = p (1 - p), dz/dw = f
    for (std::size_t n = 0; n < n_roi; ++n) {
      const double dz = g_roi[n] * p_roi[n] * (1.0 - p_roi[n]);
      const FeatureVector &f = pc.features.values[pc.roi_offsets[n]];
      for (std::size_t c = 0; c < kFeatureCount; ++c) {
        out.grad[c] += dz * f[c];
      }
    }
    if (round + 1 == rounds) {
      break;
    }
    for (std::size_t o = 0; o < pred.size(); ++o) {
      pred[o] = above_half(logit(w, pc.features.values[o])) ? 1 : 0;
    }
    const ErrorRegions err = error_regions(pred, *pc.gt);
    const std::vector<Click> fresh =
        sample_clicks(err.fn, err.fp, static_cast<std::size_t>(cfg.clicks.clicks_per_iteration), rng);
    if (!cfg.clicks.accumulate) {
      clear_clicks(pc);
    }
    add_clicks(pc, fresh);
  }
  const double inv = 1.0 / rounds;
  out.loss *= inv;
  for (double &g : out.grad) {
    g *= inv;
  }
  return out;
}

void project_click_signs(RefinerModel &m) {
  m.shared_weights[kPositiveClick] = std::max(0.0, m.shared_weights[kPositiveClick]);
  m.shared_weights[kNegativeClick] = std::min(0.0, m.shared_weights[kNegativeClick]);
  for (FeatureVector &t : m.task_weights) {
    t[kPositiveClick] = std::max(0.0, t[kPositiveClick]);
    t[kNegativeClick] = std::min(0.0, t[kNegativeClick]);
  }
}

FeatureVector read_weights(const json &j, const char *what) {
  if (!j.is_array() || j.size() != kFeatureCount) {
    throw Error(Errc::FormatError, std::string(what) + " must be an array of " + std::to_string(kFeatureCount) + " numbers");
  }
  FeatureVector out{};
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    if (!j[c].is_number()) {
      throw Error(Errc::FormatError, std::string(what) + " must hold numbers");
    }
    out[c] = j[c].get<double>();
    if (!std::isfinite(out[c])) {
      throw Error(Errc::FormatError, std::string(what) + " must be finite");
    }
  }
  return out;
}

} // namespace

FeatureGrid featurize_case(const Volume &image, const Volume &dose, const BoxPrompt3D &box,
                           std::span<const Click> clicks, double decay_scale_mm) {
  require_same_grid(image.geometry(), dose.geometry(), "featurize_case");
  if (!(decay_scale_mm > 0.0)) {
    throw Error(Errc::InvalidArgument, "decay scale must be positive");
  }
  const Geometry &g = image.geometry();
  const Volume intensity = znorm_nonzero(image);
  const double d_max = max_positive_dose(dose);

  FeatureGrid out{g, decay_scale_mm, std::vector<FeatureVector>(g.voxel_count())};
  std::size_t offset = 0;
  for (int k = 0; k < g.dims[2]; ++k) {
    const double gz = axis_gap(k, box.corner_min.k, box.corner_max.k, g.spacing[2]);
    for (int j = 0; j < g.dims[1]; ++j) {
      const double gy = axis_gap(j, box.corner_min.j, box.corner_max.j, g.spacing[1]);
      for (int i = 0; i < g.dims[0]; ++i, ++offset) {
        const double gx = axis_gap(i, box.corner_min.i, box.corner_max.i, g.spacing[0]);
        const double d_box = std::sqrt(gx * gx + gy * gy + gz * gz);
        FeatureVector &f = out.values[offset];
        f[kIntensity] = intensity[offset];
        f[kDose] = dose[offset] / d_max;
        f[kInsideBox] = d_box == 0.0 ? 1.0 : 0.0;
        f[kBoxDecay] = std::exp(-d_box / decay_scale_mm);
        f[kBias] = 1.0;
      }
    }
  }
  set_click_features(out, clicks);
  return out;
}

void set_click_features(FeatureGrid &features, std::span<const Click> clicks) {
  const Geometry &g = features.geometry;
  for (const Click &c : clicks) {
    if (!g.contains(c.pos)) {
      throw Error(Errc::InvalidArgument, "click outside the grid");
    }
  }
  const double s = features.decay_scale_mm;
  std::size_t offset = 0;
  for (int k = 0; k < g.dims[2]; ++k) {
    for (int j = 0; j < g.dims[1]; ++j) {
      for (int i = 0; i < g.dims[0]; ++i, ++offset) {
        double best_pos = kInf, best_neg = kInf;
        for (const Click &c : clicks) {
          const double dx = (i - c.pos.i) * g.spacing[0];
          const double dy = (j - c.pos.j) * g.spacing[1];
          const double dz = (k - c.pos.k) * g.spacing[2];
          const double d2 = dx * dx + dy * dy + dz * dz;
          double &best = c.polarity == Polarity::Positive ? best_pos : best_neg;
          best = std::min(best, d2);
        }
        FeatureVector &f = features.values[offset];
        f[kPositiveClick] = best_pos == kInf ? 0.0 : std::exp(-std::sqrt(best_pos) / s);
        f[kNegativeClick] = best_neg == kInf ? 0.0 : std::exp(-std::sqrt(best_neg) / s);
      }
    }
  }
}

FeatureVector RefinerModel::effective_weights(Task task) const noexcept {
  FeatureVector w = shared_weights;
  const FeatureVector &t = task_weights[static_cast<std::size_t>(task)];
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    w[c] += t[c];
  }
  return w;
}

RefinerModel box_prior_model(double strength) {
  RefinerModel m;
  m.shared_weights[kBias] = -strength;
  m.shared_weights[kInsideBox] = strength;
  return m;
}

double logit(const FeatureVector &w, const FeatureVector &f) noexcept {
  double z = 0.0;
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    z += w[c] * f[c];
  }
  return z;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ProbVolume predict(const RefinerModel &model, const TaskEmbedding &emb, const FeatureGrid &features) {
  const FeatureVector w = model.effective_weights(emb.task());
  ProbVolume out(features.geometry);
  for (std::size_t o = 0; o < features.values.size(); ++o) {
    out[o] = sigmoid(logit(w, features.values[o]));
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::InvalidArgument, "learning rate must be finite and non-negative");
  }
  if (epochs < 1) {
    throw Error(Errc::InvalidArgument, "epochs must be >= 1");
  }
  if (!(prediction_threshold > 0.0 && prediction_threshold <= 1.0)) {
    throw Error(Errc::InvalidArgument, "prediction threshold must lie in (0, 1]");
  }
  if (!(decay_scale_mm > 0.0)) {
    throw Error(Errc::InvalidArgument, "decay scale must be positive");
  }
  clicks.validate();
  loss.validate();
  dose.validate();
}

TrainResult train(std::span<const Case> cases, const TrainConfig &cfg, const RefinerModel &initial) {
  cfg.validate();
  if (cases.empty()) {
    throw Error(Errc::InvalidArgument, "training needs at least one case");
  }

  std::vector<PreparedCase> prepared;
  prepared.reserve(cases.size());
  for (const Case &c : cases) {
    require_same_grid(c.image.geometry(), c.gt.geometry(), "training case (image vs gt)");
    const DosePrompt prompt = derive_dose_prompt(c.dose, cfg.dose);
    PreparedCase pc;
    pc.features = featurize_case(c.image, c.dose, prompt.box, {}, cfg.decay_scale_mm);
    pc.gt = &c.gt;
    pc.embedding = featurize_text(c.text);
    for (std::size_t o = 0; o < prompt.roi.size(); ++o) {
      if (prompt.roi[o] != 0) {
        pc.roi_offsets.push_back(o);
        pc.roi_labels.push_back(c.gt[o] != 0 ? 1 : 0);
      }
    }
    pc.pos_d2.assign(c.gt.size(), kInf);
    pc.neg_d2.assign(c.gt.size(), kInf);
    prepared.push_back(std::move(pc));
  }

  TrainResult result{initial, {}};
  if (cfg.constrain_click_signs) {
    project_click_signs(result.model);
  }
  const double inv_cases = 1.0 / static_cast<double>(prepared.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    FeatureVector shared_grad{};
    std::array<FeatureVector, kTaskCount> task_grad{};
    double loss = 0.0;
    for (std::size_t ci = 0; ci < prepared.size(); ++ci) {
      // one stream per (epoch, case): independent of evaluation order
      SeededRng rng(mix_seed(cfg.seed ^ mix_seed(static_cast<std::uint64_t>(epoch) * prepared.size() + ci)));
      const CaseGradient cg = case_gradient(prepared[ci], result.model, cfg, rng);
      const auto t = static_cast<std::size_t>(prepared[ci].embedding.task());
      for (std::size_t c = 0; c < kFeatureCount; ++c) {
        shared_grad[c] += cg.grad[c] * inv_cases;
        task_grad[t][c] += cg.grad[c] * inv_cases;
      }
      loss += cg.loss * inv_cases;
    }
    if (!std::isfinite(loss)) {
      throw Error(Errc::TrainingDiverged, "non-finite loss at epoch " + std::to_string(epoch));
    }
    result.epoch_loss.push_back(loss);
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      result.model.shared_weights[c] -= cfg.learning_rate * shared_grad[c];
      for (std::size_t t = 0; t < kTaskCount; ++t) {
        result.model.task_weights[t][c] -= cfg.learning_rate * task_grad[t][c];
      }
    }
    if (cfg.constrain_click_signs) {
      project_click_signs(result.model);
    }
    for (double w : result.model.shared_weights) {
      if (!std::isfinite(w)) {
        throw Error(Errc::TrainingDiverged, "non-finite weights at epoch " + std::to_string(epoch));
      }
    }
  }
  return result;
}

ProbVolume infer_probability(const RefinerModel &model, const Volume &image, const Volume &dose,
                             const TextPromptRecord &text, const TrainConfig &cfg, std::span<const Click> clicks) {
  const BoxPrompt3D box = dose_guided_box(dose, cfg.dose);
  const FeatureGrid features = featurize_case(image, dose, box, clicks, cfg.decay_scale_mm);
  return predict(model, featurize_text(text), features);
}

Mask infer(const RefinerModel &model, const Volume &image, const Volume &dose, const TextPromptRecord &text,
           const TrainConfig &cfg, std::span<const Click> clicks) {
  return binarize(infer_probability(model, image, dose, text, cfg, clicks), cfg.prediction_threshold);
}

json to_json(const RefinerModel &model) {
  json tasks = json::object();
  for (std::size_t t = 0; t < kTaskCount; ++t) {
    tasks[std::string(to_string(static_cast<Task>(t)))] = model.task_weights[t];
  }
  return json{{"shared_weights", model.shared_weights}, {"task_weights", tasks}, {"feature_spec_version", kFeatureSpecVersion}};
}

RefinerModel model_from_json(const json &j) {
  if (!j.is_object() || !j.contains("shared_weights") || !j.contains("task_weights") ||
      !j.contains("feature_spec_version")) {
    throw Error(Errc::FormatError, "model needs shared_weights, task_weights and feature_spec_version");
  }
  if (!j["feature_spec_version"].is_number_integer() || j["feature_spec_version"].get<int>() != kFeatureSpecVersion) {
    throw Error(Errc::FormatError, "unsupported feature_spec_version");
  }
  RefinerModel m;
  m.shared_weights = read_weights(j["shared_weights"], "shared_weights");
  const json &tasks = j["task_weights"];
  if (!tasks.is_object()) {
    throw Error(Errc::FormatError, "task_weights must be an object keyed by task");
  }
  for (std::size_t t = 0; t < kTaskCount; ++t) {
    const std::string name(to_string(static_cast<Task>(t)));
    if (!tasks.contains(name)) {
      throw Error(Errc::FormatError, "task_weights missing " + name);
    }
    m.task_weights[t] = read_weights(tasks[name], ("task_weights." + name).c_str());
  }
  return m;
}

} // namespace rtprompt

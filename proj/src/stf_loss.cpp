#include "rtprompt/stf_loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace rtprompt {

namespace {

void check_probabilities(std::span<const double> p) {
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(Errc::InvalidProbability, "probability " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

void check_inputs(const ProbVolume &p, const Mask &y, const Mask &r) {
  require_same_grid(p.geometry(), y.geometry(), "stf loss (p vs y)");
  require_same_grid(p.geometry(), r.geometry(), "stf loss (p vs r)");
  check_probabilities(p.values());
}

ConfusionTerms accumulate(std::span<const double> p, std::span<const std::uint8_t> y) {
  ConfusionTerms c;
  for (std::size_t o = 0; o < p.size(); ++o) {
    const double pv = p[o];
    const double yv = y[o] != 0 ? 1.0 : 0.0;
    c.tp += pv * yv;
    c.fp += pv * (1.0 - yv);
    c.fn += (1.0 - pv) * yv;
    c.sum_p += pv;
    c.sum_y += yv;
  }
  c.roi_voxels = p.size();
  return c;
}

double dice_from(const ConfusionTerms &c, double eps) {
  return 1.0 - (2.0 * c.tp + eps) / (c.sum_p + c.sum_y + eps);
}

double tversky_base(const ConfusionTerms &c, const LossParams &prm) {
  const double index = (c.tp + prm.epsilon) / (c.tp + prm.alpha * c.fp + prm.beta * c.fn + prm.epsilon);
  // the index cannot exceed 1 for non-negative alpha and beta
  return std::max(0.0, 1.0 - index);
}

double focal_tversky_from(const ConfusionTerms &c, const LossParams &prm) {
  return std::pow(tversky_base(c, prm), prm.gamma);
}

LossTerms terms_from(const ConfusionTerms &c, const LossParams &prm) {
  LossTerms t;
  if (c.roi_voxels == 0) {
    warn("stf loss evaluated over an empty ROI; loss and gradient are zero");
  }
  t.dice = dice_from(c, prm.epsilon);
  t.focal_tversky = focal_tversky_from(c, prm);
  t.stf = prm.lambda1 * t.dice + prm.lambda2 * t.focal_tversky;
  return t;
}

struct Gathered {
  std::vector<double> p;
  std::vector<std::uint8_t> y;
  std::vector<std::size_t> offsets;
};

Gathered gather(const ProbVolume &p, const Mask &y, const Mask &r) {
  Gathered g;
  for (std::size_t o = 0; o < p.size(); ++o) {
    if (r[o] != 0) {
      g.p.push_back(p[o]);
      g.y.push_back(y[o] != 0 ? 1 : 0);
      g.offsets.push_back(o);
    }
  }
  return g;
}

} // namespace

void LossParams::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0 || alpha < 0.0 || beta < 0.0) {
    throw Error(Errc::InvalidArgument, "loss weights must be non-negative");
  }
  if (!(gamma > 0.0) || !(epsilon > 0.0)) {
    throw Error(Errc::InvalidArgument, "gamma and epsilon must be positive");
  }
}

ConfusionTerms soft_confusion(const ProbVolume &p, const Mask &y, const Mask &r) {
  check_inputs(p, y, r);
  const Gathered g = gather(p, y, r);
  return accumulate(g.p, g.y);
}

double dice_roi(const ProbVolume &p, const Mask &y, const Mask &r, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(Errc::InvalidArgument, "epsilon must be positive");
  }
  return dice_from(soft_confusion(p, y, r), epsilon);
}

double focal_tversky_roi(const ProbVolume &p, const Mask &y, const Mask &r, const LossParams &params) {
  params.validate();
  return focal_tversky_from(soft_confusion(p, y, r), params);
}

LossTerms stf_terms(const ProbVolume &p, const Mask &y, const Mask &r, const LossParams &params) {
  params.validate();
  return terms_from(soft_confusion(p, y, r), params);
}

double stf(const ProbVolume &p, const Mask &y, const Mask &r, const LossParams &params) {
  return stf_terms(p, y, r, params).stf;
}

LossTerms stf_compact(std::span<const double> p, std::span<const std::uint8_t> y, const LossParams &prm,
                      std::span<double> grad) {
  prm.validate();
  if (p.size() != y.size() || (!grad.empty() && grad.size() != p.size())) {
    throw Error(Errc::GridMismatch, "compact loss inputs differ in length");
  }
  check_probabilities(p);
  const ConfusionTerms c = accumulate(p, y);
  const LossTerms terms = terms_from(c, prm);
  if (grad.empty() || c.roi_voxels == 0) {
    return terms;
  }

  // Dice: L = 1 - N/D, N = 2 TP + eps, D = sum p + sum y + eps
  //   dL/dp_v = -(2 y_v D - N) / D^2
  const double dn = 2.0 * c.tp + prm.epsilon;
  const double dd = c.sum_p + c.sum_y + prm.epsilon;
  const double dice_pos = -(2.0 * dd - dn) / (dd * dd);  // y_v = 1
  const double dice_neg = dn / (dd * dd);                // y_v = 0

  // Focal Tversky: T = A/B, A = TP + eps, B = TP + alpha FP + beta FN + eps
  //   dA/dp_v = y_v, dB/dp_v = y_v (1 - beta) + (1 - y_v) alpha
  //   dL/dp_v = -gamma (1 - T)^(gamma - 1) dT/dp_v
  const double ta = c.tp + prm.epsilon;
  const double tb = c.tp + prm.alpha * c.fp + prm.beta * c.fn + prm.epsilon;
  const double base = tversky_base(c, prm);
  double focal = 0.0;
  if (base > 0.0 || prm.gamma >= 1.0) {
    focal = -prm.gamma * std::pow(base, prm.gamma - 1.0);
  }
  const double dt_pos = (tb - ta * (1.0 - prm.beta)) / (tb * tb);
  const double dt_neg = -ta * prm.alpha / (tb * tb);

  const double g_pos = prm.lambda1 * dice_pos + prm.lambda2 * focal * dt_pos;
  const double g_neg = prm.lambda1 * dice_neg + prm.lambda2 * focal * dt_neg;
  for (std::size_t o = 0; o < p.size(); ++o) {
    grad[o] = y[o] != 0 ? g_pos : g_neg;
  }
  return terms;
}

LossAndGrad stf_with_grad(const ProbVolume &p, const Mask &y, const Mask &r, const LossParams &params) {
  check_inputs(p, y, r);
  const Gathered g = gather(p, y, r);
  std::vector<double> grad(g.p.size());
  LossAndGrad out{stf_compact(g.p, g.y, params, grad), ProbVolume(p.geometry(), 0.0)};
  for (std::size_t n = 0; n < g.offsets.size(); ++n) {
    out.grad[g.offsets[n]] = grad[n];
  }
  return out;
}

ProbVolume stf_grad(const ProbVolume &p, const Mask &y, const Mask &r, const LossParams &params) {
  return stf_with_grad(p, y, r, params).grad;
}

} // namespace rtprompt

#pragma once

// Direct-formula ROI losses and a central finite-difference gradient.

#include <cmath>
#include <functional>
#include <vector>

#include "rtprompt/grid.hpp"

namespace oracle {

struct LossSettings {
  double l1 = 0.7, l2 = 0.3, alpha = 0.5, beta = 0.5, gamma = 0.75, eps = 1e-5;
};

inline double dice_loss(const rtprompt::ProbVolume &p, const rtprompt::Mask &y, const rtprompt::Mask &r, double eps) {
  double py = 0, sp = 0, sy = 0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    if (!r[v]) continue;
    py += p[v] * y[v];
    sp += p[v];
    sy += y[v];
  }
  return 1.0 - (2.0 * py + eps) / (sp + sy + eps);
}

inline double ft_loss(const rtprompt::ProbVolume &p, const rtprompt::Mask &y, const rtprompt::Mask &r,
                      const LossSettings &s) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    if (!r[v]) continue;
    tp += p[v] * y[v];
    fp += p[v] * (1 - y[v]);
    fn += (1 - p[v]) * y[v];
  }
  const double ti = (tp + s.eps) / (tp + s.alpha * fp + s.beta * fn + s.eps);
  return std::pow(1.0 - ti, s.gamma);
}

inline double stf_loss(const rtprompt::ProbVolume &p, const rtprompt::Mask &y, const rtprompt::Mask &r,
                       const LossSettings &s) {
  return s.l1 * dice_loss(p, y, r, s.eps) + s.l2 * ft_loss(p, y, r, s);
}

inline std::vector<double> central_difference(const std::function<double(const rtprompt::ProbVolume &)> &f,
                                              const rtprompt::ProbVolume &p, double h) {
  std::vector<double> g(p.size());
  rtprompt::ProbVolume q = p;
  for (std::size_t v = 0; v < p.size(); ++v) {
    q[v] = p[v] + h;
    const double up = f(q);
    q[v] = p[v] - h;
    const double down = f(q);
    q[v] = p[v];
    g[v] = (up - down) / (2 * h);
  }
  return g;
}

} // namespace oracle

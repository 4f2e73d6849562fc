#include "rtprompt/doseprompt.hpp"

#include <cmath>
#include <string>

namespace rtprompt {

void DosePromptConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw Error(Errc::InvalidArgument, "tau must lie in (0, 1], got " + std::to_string(tau));
  }
}

double max_positive_dose(const Volume &dose) {
  double best = 0.0;
  for (float v : dose.values()) {
    if (v > 0.0f && v > best) {
      best = v;
    }
  }
  if (!(best > 0.0)) {
    throw Error(Errc::NoDose, "dose map has no positive voxels");
  }
  return best;
}

DosePrompt derive_dose_prompt(const Volume &dose, const DosePromptConfig &cfg) {
  cfg.validate();
  const double d_max = max_positive_dose(dose);
  const double threshold = cfg.tau * d_max;
  Mask raw(dose.geometry());
  for (std::size_t o = 0; o < dose.size(); ++o) {
    raw[o] = static_cast<double>(dose[o]) >= threshold ? 1 : 0;
  }
  DosePrompt out;
  out.roi = largest_connected_component(raw, cfg.connectivity);
  out.box = bounding_box(out.roi);
  out.d_max = d_max;
  return out;
}

Mask high_dose_mask(const Volume &dose, const DosePromptConfig &cfg) { return derive_dose_prompt(dose, cfg).roi; }

Mask roi_mask(const Volume &dose, const DosePromptConfig &cfg) { return high_dose_mask(dose, cfg); }

BoxPrompt3D dose_guided_box(const Volume &dose, const DosePromptConfig &cfg) {
  return derive_dose_prompt(dose, cfg).box;
}

} // namespace rtprompt

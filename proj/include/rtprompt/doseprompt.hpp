#pragma once

// Dose-guided prompting: the high-dose region of a radiotherapy dose map,
// reduced to its largest connected component, serves both as the loss ROI
// and (through its bounding box) as the coarse localisation prompt.

#include "rtprompt/grid.hpp"
#include "rtprompt/volgrid.hpp"

namespace rtprompt {

struct DosePromptConfig {
  double tau = 0.8;
  Connectivity connectivity = Connectivity::TwentySix;

  /// Throws InvalidArgument unless 0 < tau <= 1.
  void validate() const;
};

/// Maximum over strictly positive dose voxels. Throws NoDose.
double max_positive_dose(const Volume &dose);

/// Largest component of {dose >= tau * D_max}.
Mask high_dose_mask(const Volume &dose, const DosePromptConfig &cfg = {});

/// Same mask as high_dose_mask; named for its use as the loss ROI.
Mask roi_mask(const Volume &dose, const DosePromptConfig &cfg = {});

BoxPrompt3D dose_guided_box(const Volume &dose, const DosePromptConfig &cfg = {});

/// ROI and box computed together (one thresholding pass).
struct DosePrompt {
  Mask roi;
  BoxPrompt3D box;
  double d_max = 0.0;
};
DosePrompt derive_dose_prompt(const Volume &dose, const DosePromptConfig &cfg = {});

} // namespace rtprompt

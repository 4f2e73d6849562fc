#pragma once

#include "rtprompt/grid.hpp"
#include "rtprompt/textprompt.hpp"

namespace rtprompt {

/// One labelled case: co-registered image, dose and lesion mask plus its text prompt.
struct Case {
  Volume image;
  Volume dose;
  Mask gt;
  TextPromptRecord text;

  friend bool operator==(const Case &, const Case &) = default;
};

} // namespace rtprompt

#include "rtprompt/clicksim.hpp"

#include <string>
#include <utility>

#include "rtprompt/volgrid.hpp"

namespace rtprompt {

void ClickSchedule::validate() const {
  if (iterations < 0) {
    throw Error(Errc::InvalidArgument, "click iterations must be >= 0");
  }
  if (clicks_per_iteration < 1) {
    throw Error(Errc::InvalidArgument, "clicks per iteration must be >= 1");
  }
}

ErrorRegions error_regions(const Mask &pred, const Mask &gt) {
  require_same_grid(pred.geometry(), gt.geometry(), "error_regions");
  ErrorRegions out{Mask(gt.geometry()), Mask(gt.geometry())};
  for (std::size_t o = 0; o < gt.size(); ++o) {
    const bool p = pred[o] != 0;
    const bool g = gt[o] != 0;
    out.fn[o] = (g && !p) ? 1 : 0;
    out.fp[o] = (p && !g) ? 1 : 0;
  }
  return out;
}

std::vector<Click> sample_clicks(const Mask &fn, const Mask &fp, std::size_t n, SeededRng &rng) {
  require_same_grid(fn.geometry(), fp.geometry(), "sample_clicks");
  std::vector<std::size_t> pool;
  for (std::size_t o = 0; o < fn.size(); ++o) {
    if (fn[o] != 0 || fp[o] != 0) {
      pool.push_back(o);
    }
  }
  const std::size_t take = std::min(n, pool.size());
  std::vector<Click> clicks;
  clicks.reserve(take);
  for (std::size_t c = 0; c < take; ++c) {
    const std::size_t pick = c + static_cast<std::size_t>(rng.uniform_index(pool.size() - c));
    std::swap(pool[c], pool[pick]);
    const std::size_t o = pool[c];
    clicks.push_back({fn.geometry().index(o), fn[o] != 0 ? Polarity::Positive : Polarity::Negative});
  }
  return clicks;
}

std::vector<Click> refine_round(const ProbVolume &prediction, const Mask &gt, double threshold, std::size_t n,
                                SeededRng &rng) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(Errc::InvalidArgument, "refinement threshold must lie in (0, 1)");
  }
  require_same_grid(prediction.geometry(), gt.geometry(), "refine_round");
  const ErrorRegions err = error_regions(binarize(prediction, threshold), gt);
  return sample_clicks(err.fn, err.fp, n, rng);
}

} // namespace rtprompt

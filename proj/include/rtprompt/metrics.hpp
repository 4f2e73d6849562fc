#pragma once

// Segmentation metrics: overlap (Dice, IoU, precision, recall) and boundary
// distance (HD95, ASSD).
//
// Boundary distances use the 6-neighbourhood surface of each mask (a
// foreground voxel with a background or out-of-grid face neighbour). For
// masks A and B the directed distances from every surface voxel of A to the
// nearest surface voxel of B, and from B to A, are pooled into one multiset;
// HD95 is its 95th percentile (linear interpolation between closest ranks)
// and ASSD its mean. Distances are Euclidean in mm using the grid spacing.

#include <cstdint>
#include <optional>
#include <vector>

#include "rtprompt/grid.hpp"

namespace rtprompt {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  friend bool operator==(const ConfusionCounts &, const ConfusionCounts &) = default;
};

struct OverlapMetrics {
  double dice = 0.0;
  double iou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct MetricsReport {
  double dice = 0.0;
  double iou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  /// Empty when either mask is empty.
  std::optional<double> hd95_mm;
  std::optional<double> assd_mm;
};

ConfusionCounts confusion(const Mask &pred, const Mask &gt);

/// 0/0 conventions: when tp = fp = fn = 0 (both masks empty) every metric
/// is 1; otherwise an empty denominator gives 0.
OverlapMetrics overlap_metrics(const ConfusionCounts &c);

std::vector<VoxelIndex> surface_voxels(const Mask &m, Connectivity connectivity = Connectivity::Six);

/// Pooled symmetric surface distances (mm), sorted ascending. Throws
/// UndefinedDistance when either mask is empty.
std::vector<double> surface_distances(const Mask &a, const Mask &b);

/// Linear-interpolation percentile of a sorted sample, q in [0, 100].
double percentile_sorted(const std::vector<double> &sorted, double q);

double hd95(const Mask &a, const Mask &b);
double assd(const Mask &a, const Mask &b);

MetricsReport evaluate(const Mask &pred, const Mask &gt);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

/// Mean and population std per metric; distance summaries skip undefined cases.
struct MetricsSummary {
  MeanStd dice, iou, precision, recall, hd95_mm, assd_mm;
};
MetricsSummary summarize(const std::vector<MetricsReport> &reports);

} // namespace rtprompt

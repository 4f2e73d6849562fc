#include "rtprompt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rtprompt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exact squared distance transform of one line (Felzenszwalb & Huttenlocher),
// sample pitch `h`. Entries equal to +inf are not sites.
void edt_line(std::vector<double> &f, double h, std::vector<double> &out, std::vector<int> &v,
              std::vector<double> &z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  const double h2 = h * h;
  for (int q = 0; q < n; ++q) {
    if (f[static_cast<std::size_t>(q)] == kInf) {
      continue;
    }
    const double fq = f[static_cast<std::size_t>(q)] + h2 * q * q;
    double s = -kInf;
    while (k >= 0) {
      const int p = v[static_cast<std::size_t>(k)];
      const double fp = f[static_cast<std::size_t>(p)] + h2 * p * p;
      s = (fq - fp) / (2.0 * h2 * (q - p));
      if (s <= z[static_cast<std::size_t>(k)]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = k == 0 ? -kInf : s;
    z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(j) + 1] < q) {
      ++j;
    }
    const int p = v[static_cast<std::size_t>(j)];
    const double d = h * (q - p);
    out[static_cast<std::size_t>(q)] = f[static_cast<std::size_t>(p)] + d * d;
  }
}

// Squared mm distance from every voxel to the nearest site.
std::vector<double> squared_distance_field(const Geometry &g, const std::vector<VoxelIndex> &sites) {
  std::vector<double> field(g.voxel_count(), kInf);
  for (const VoxelIndex &s : sites) {
    field[g.linear(s)] = 0.0;
  }
  const int longest = std::max({g.dims[0], g.dims[1], g.dims[2]});
  std::vector<double> line, out;
  std::vector<int> v(static_cast<std::size_t>(longest));
  std::vector<double> z(static_cast<std::size_t>(longest) + 1);

  for (int axis = 0; axis < 3; ++axis) {
    const int n = g.dims[axis];
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    line.resize(static_cast<std::size_t>(n));
    out.resize(static_cast<std::size_t>(n));
    for (int u = 0; u < g.dims[a1]; ++u) {
      for (int w = 0; w < g.dims[a2]; ++w) {
        std::array<int, 3> idx{};
        idx[a1] = u;
        idx[a2] = w;
        for (int q = 0; q < n; ++q) {
          idx[axis] = q;
          line[static_cast<std::size_t>(q)] = field[g.linear(idx[0], idx[1], idx[2])];
        }
        edt_line(line, g.spacing[axis], out, v, z);
        for (int q = 0; q < n; ++q) {
          idx[axis] = q;
          field[g.linear(idx[0], idx[1], idx[2])] = out[static_cast<std::size_t>(q)];
        }
      }
    }
  }
  return field;
}

void mean_std(const std::vector<double> &xs, MeanStd &out) {
  out.n = xs.size();
  if (xs.empty()) {
    return;
  }
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
  }
  out.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) {
    ss += (x - out.mean) * (x - out.mean);
  }
  out.std = std::sqrt(ss / static_cast<double>(xs.size()));
}

} // namespace

ConfusionCounts confusion(const Mask &pred, const Mask &gt) {
  require_same_grid(pred.geometry(), gt.geometry(), "confusion");
  ConfusionCounts c;
  for (std::size_t o = 0; o < gt.size(); ++o) {
    const bool p = pred[o] != 0;
    const bool g = gt[o] != 0;
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

OverlapMetrics overlap_metrics(const ConfusionCounts &c) {
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) {
    return {1.0, 1.0, 1.0, 1.0};
  }
  const auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  return {ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn), ratio(c.tp, c.tp + c.fp + c.fn), ratio(c.tp, c.tp + c.fp),
          ratio(c.tp, c.tp + c.fn)};
}

std::vector<VoxelIndex> surface_voxels(const Mask &m, Connectivity connectivity) {
  const Geometry &g = m.geometry();
  const auto offsets = neighbor_offsets(connectivity);
  std::vector<VoxelIndex> out;
  for (std::size_t o = 0; o < m.size(); ++o) {
    if (m[o] == 0) {
      continue;
    }
    const VoxelIndex v = g.index(o);
    for (const auto &d : offsets) {
      const int i = v.i + d[0], j = v.j + d[1], k = v.k + d[2];
      if (!g.contains(i, j, k) || m.at(i, j, k) == 0) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

std::vector<double> surface_distances(const Mask &a, const Mask &b) {
  require_same_grid(a.geometry(), b.geometry(), "surface distances");
  const std::vector<VoxelIndex> sa = surface_voxels(a);
  const std::vector<VoxelIndex> sb = surface_voxels(b);
  if (sa.empty() || sb.empty()) {
    throw Error(Errc::UndefinedDistance, "surface distance needs two non-empty masks");
  }
  const Geometry &g = a.geometry();
  const std::vector<double> to_b = squared_distance_field(g, sb);
  const std::vector<double> to_a = squared_distance_field(g, sa);
  std::vector<double> pooled;
  pooled.reserve(sa.size() + sb.size());
  for (const VoxelIndex &v : sa) {
    pooled.push_back(std::sqrt(to_b[g.linear(v)]));
  }
  for (const VoxelIndex &v : sb) {
    pooled.push_back(std::sqrt(to_a[g.linear(v)]));
  }
  std::sort(pooled.begin(), pooled.end());
  return pooled;
}

double percentile_sorted(const std::vector<double> &sorted, double q) {
  if (sorted.empty()) {
    throw Error(Errc::InvalidArgument, "percentile of an empty sample");
  }
  const double rank = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

double hd95(const Mask &a, const Mask &b) { return percentile_sorted(surface_distances(a, b), 95.0); }

double assd(const Mask &a, const Mask &b) {
  const std::vector<double> d = surface_distances(a, b);
  double sum = 0.0;
  for (double x : d) {
    sum += x;
  }
  return sum / static_cast<double>(d.size());
}

MetricsReport evaluate(const Mask &pred, const Mask &gt) {
  const OverlapMetrics o = overlap_metrics(confusion(pred, gt));
  MetricsReport r{o.dice, o.iou, o.precision, o.recall, std::nullopt, std::nullopt};
  if (count(pred) > 0 && count(gt) > 0) {
    const std::vector<double> d = surface_distances(pred, gt);
    r.hd95_mm = percentile_sorted(d, 95.0);
    double sum = 0.0;
    for (double x : d) {
      sum += x;
    }
    r.assd_mm = sum / static_cast<double>(d.size());
  }
  return r;
}

MetricsSummary summarize(const std::vector<MetricsReport> &reports) {
  std::vector<double> dice, iou, precision, recall, hd, as;
  for (const MetricsReport &r : reports) {
    dice.push_back(r.dice);
    iou.push_back(r.iou);
    precision.push_back(r.precision);
    recall.push_back(r.recall);
    if (r.hd95_mm) {
      hd.push_back(*r.hd95_mm);
    }
    if (r.assd_mm) {
      as.push_back(*r.assd_mm);
    }
  }
  MetricsSummary s;
  mean_std(dice, s.dice);
  mean_std(iou, s.iou);
  mean_std(precision, s.precision);
  mean_std(recall, s.recall);
  mean_std(hd, s.hd95_mm);
  mean_std(as, s.assd_mm);
  return s;
}

} // namespace rtprompt

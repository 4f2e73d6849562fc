#pragma once

// Train/evaluate plumbing shared by the CLI sweeps and the acceptance runs.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtprompt/metrics.hpp"
#include "rtprompt/refiner.hpp"

namespace rtprompt {

struct Evaluation {
  std::vector<MetricsReport> cases;
  MetricsSummary summary;
};

/// Click-free inference on every case, scored against its gt.
Evaluation evaluate_model(const RefinerModel &model, std::span<const Case> cases, const TrainConfig &cfg);

struct SweepRow {
  double value = 0.0;
  /// Empty when training or evaluation failed for this row; see error.
  std::optional<MetricsSummary> summary;
  std::string error;
};

struct SweepReport {
  std::string parameter;
  /// Sorted by value.
  std::vector<SweepRow> rows;

  bool ok() const noexcept;
};

/// Trains on `train_cases` once per tau (same seed, everything else from
/// cfg) and evaluates on `eval_cases`. Taus must be non-empty, distinct and
/// in (0, 1]; they are checked before any training (InvalidArgument).
/// `parallel` > 1 runs rows on that many threads; rows are independent so
/// the report does not depend on it.
SweepReport sweep_tau(std::span<const Case> train_cases, std::span<const Case> eval_cases,
                      const std::vector<double> &taus, const TrainConfig &cfg, int parallel = 1);

/// Refinement iterations per training round (clicks per iteration from cfg).
SweepReport sweep_iterations(std::span<const Case> train_cases, std::span<const Case> eval_cases,
                             const std::vector<int> &iterations, const TrainConfig &cfg, int parallel = 1);

/// Clicks per iteration (iterations from cfg).
SweepReport sweep_clicks_per_iteration(std::span<const Case> train_cases, std::span<const Case> eval_cases,
                                       const std::vector<int> &clicks, const TrainConfig &cfg, int parallel = 1);

nlohmann::json to_json(const MetricsReport &r);
nlohmann::json to_json(const MetricsSummary &s);
nlohmann::json to_json(const SweepReport &r);

/// Plain-text table (value, Dice mean +- std, HD95 mean +- std).
std::string format_table(const SweepReport &r);

} // namespace rtprompt

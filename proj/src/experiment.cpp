#include "rtprompt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <thread>

namespace rtprompt {

using nlohmann::json;

namespace {

// Runs job(i) for i in [0, n) on up to `parallel` threads.
void run_indexed(std::size_t n, int parallel, const std::function<void(std::size_t)> &job) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, parallel)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      job(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        job(i);
      }
    });
  }
  for (std::thread &t : pool) {
    t.join();
  }
}

template <typename V>
void check_values(const std::vector<V> &values, const char *what) {
  if (values.empty()) {
    throw Error(Errc::InvalidArgument, std::string(what) + " list is empty");
  }
  if (std::set<V>(values.begin(), values.end()).size() != values.size()) {
    throw Error(Errc::InvalidArgument, std::string(what) + " list has duplicates");
  }
}

template <typename V, typename Apply>
SweepReport sweep(const char *parameter, std::span<const Case> train_cases, std::span<const Case> eval_cases,
                  std::vector<V> values, const TrainConfig &base, int parallel, Apply apply) {
  check_values(values, parameter);
  std::sort(values.begin(), values.end());
  std::vector<TrainConfig> configs;
  for (const V v : values) {
    TrainConfig cfg = base;
    apply(cfg, v);
    cfg.validate();
    configs.push_back(cfg);
  }
  if (train_cases.empty() || eval_cases.empty()) {
    throw Error(Errc::InvalidArgument, "sweep needs training and evaluation cases");
  }

  SweepReport report{parameter, std::vector<SweepRow>(values.size())};
  run_indexed(values.size(), parallel, [&](std::size_t i) {
    SweepRow &row = report.rows[i];
    row.value = static_cast<double>(values[i]);
    try {
      const TrainResult trained = train(train_cases, configs[i]);
      row.summary = evaluate_model(trained.model, eval_cases, configs[i]).summary;
    } catch (const std::exception &ex) {
      row.error = ex.what();
    }
  });
  return report;
}

json mean_std(const MeanStd &m) {
  return json{{"mean", m.mean}, {"std", m.std}, {"n", m.n}};
}

json optional_number(const std::optional<double> &v) {
  return v ? json(*v) : json(nullptr);
}

} // namespace

Evaluation evaluate_model(const RefinerModel &model, std::span<const Case> cases, const TrainConfig &cfg) {
  Evaluation out;
  for (const Case &c : cases) {
    out.cases.push_back(evaluate(infer(model, c.image, c.dose, c.text, cfg), c.gt));
  }
  out.summary = summarize(out.cases);
  return out;
}

bool SweepReport::ok() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow &r) { return r.summary.has_value(); });
}

SweepReport sweep_tau(std::span<const Case> train_cases, std::span<const Case> eval_cases,
                      const std::vector<double> &taus, const TrainConfig &cfg, int parallel) {
  return sweep("tau", train_cases, eval_cases, taus, cfg, parallel,
               [](TrainConfig &c, double tau) { c.dose.tau = tau; });
}

SweepReport sweep_iterations(std::span<const Case> train_cases, std::span<const Case> eval_cases,
                             const std::vector<int> &iterations, const TrainConfig &cfg, int parallel) {
  return sweep("iterations", train_cases, eval_cases, iterations, cfg, parallel,
               [](TrainConfig &c, int n) { c.clicks.iterations = n; });
}

SweepReport sweep_clicks_per_iteration(std::span<const Case> train_cases, std::span<const Case> eval_cases,
                                       const std::vector<int> &clicks, const TrainConfig &cfg, int parallel) {
  return sweep("clicks_per_iteration", train_cases, eval_cases, clicks, cfg, parallel,
               [](TrainConfig &c, int n) { c.clicks.clicks_per_iteration = n; });
}

json to_json(const MetricsReport &r) {
  return json{{"dice", r.dice},
              {"iou", r.iou},
              {"precision", r.precision},
              {"recall", r.recall},
              {"hd95_mm", optional_number(r.hd95_mm)},
              {"assd_mm", optional_number(r.assd_mm)}};
}

json to_json(const MetricsSummary &s) {
  return json{{"dice", mean_std(s.dice)},           {"iou", mean_std(s.iou)},
              {"precision", mean_std(s.precision)}, {"recall", mean_std(s.recall)},
              {"hd95_mm", mean_std(s.hd95_mm)},     {"assd_mm", mean_std(s.assd_mm)}};
}

json to_json(const SweepReport &r) {
  json rows = json::array();
  for (const SweepRow &row : r.rows) {
    json j{{"value", row.value}};
    if (row.summary) {
      j["dice"] = mean_std(row.summary->dice);
      j["hd95_mm"] = mean_std(row.summary->hd95_mm);
      j["summary"] = to_json(*row.summary);
    } else {
      j["error"] = row.error;
    }
    rows.push_back(std::move(j));
  }
  return json{{"parameter", r.parameter}, {"rows", rows}};
}

std::string format_table(const SweepReport &r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %-20s %-20s\n", r.parameter.c_str(), "Dice", "HD95 (mm)");
  out += line;
  for (const SweepRow &row : r.rows) {
    if (!row.summary) {
      std::snprintf(line, sizeof line, "%-22g failed: %s\n", row.value, row.error.c_str());
    } else {
      const MetricsSummary &s = *row.summary;
      std::snprintf(line, sizeof line, "%-22g %.4f +- %.4f      %.3f +- %.3f (n=%zu)\n", row.value, s.dice.mean,
                    s.dice.std, s.hd95_mm.mean, s.hd95_mm.std, s.hd95_mm.n);
    }
    out += line;
  }
  return out;
}

} // namespace rtprompt

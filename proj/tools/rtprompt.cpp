// rtprompt command line: phantom generation, dose prompts, click simulation,
// loss and metric evaluation, training, prediction and the two sweeps.
//
// JSON goes to stdout, human-readable tables to stderr under --verbose.
// A JSON config file (--config) may supply any flag; top-level keys are
// global flags, nested objects address a subcommand, e.g.
//   {"seed": 3, "train": {"epochs": 50, "tau": 0.7}}
// Flags given on the command line win over the file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rtprompt/experiment.hpp"
#include "rtprompt/manifest.hpp"
#include "rtprompt/mv1.hpp"
#include "rtprompt/phantom.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rtprompt;

namespace {

class JsonConfig : public CLI::Config {
public:
  std::string to_config(const CLI::App *app, bool default_also, bool, std::string) const override {
    json j = json::object();
    for (const CLI::Option *opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) {
        continue;
      }
      const std::string name = opt->get_lnames()[0];
      if (opt->count() > 0) {
        j[name] = opt->results().size() == 1 ? json(opt->results()[0]) : json(opt->results());
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream &input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception &ex) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + ex.what());
    }
    if (!j.is_object()) {
      throw CLI::ConversionError("config file must hold a JSON object");
    }
    std::vector<CLI::ConfigItem> out;
    collect(j, {}, out);
    return out;
  }

private:
  static std::string scalar(const json &v) {
    if (v.is_string()) {
      return v.get<std::string>();
    }
    if (v.is_boolean()) {
      return v.get<bool>() ? "true" : "false";
    }
    if (v.is_number()) {
      return v.dump();
    }
    throw CLI::ConversionError("config values must be strings, numbers, booleans or arrays of those");
  }

  static void collect(const json &obj, const std::vector<std::string> &parents, std::vector<CLI::ConfigItem> &out) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (it->is_object()) {
        std::vector<std::string> p = parents;
        p.push_back(it.key());
        collect(*it, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = it.key();
      if (it->is_array()) {
        for (const json &v : *it) {
          item.inputs.push_back(scalar(v));
        }
      } else {
        item.inputs = {scalar(*it)};
      }
      out.push_back(std::move(item));
    }
  }
};

struct Globals {
  std::uint64_t seed = 11;
  bool verbose = false;
  bool compact = false;
};

Globals g_opts;

void emit(const json &j) {
  std::cout << (g_opts.compact ? j.dump() : j.dump(2)) << '\n';
}

void note(const std::string &text) {
  if (g_opts.verbose) {
    std::cerr << text;
    if (!text.empty() && text.back() != '\n') {
      std::cerr << '\n';
    }
  }
}

json ivec(const VoxelIndex &v) {
  return json::array({v.i, v.j, v.k});
}

json read_json_file(const fs::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::FormatError, "cannot open " + path.string());
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception &ex) {
    throw Error(Errc::FormatError, path.string() + ": " + ex.what());
  }
}

void write_json_file(const json &j, const fs::path &path) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(Errc::FormatError, "cannot write " + path.string());
  }
}

json clicks_to_json(const std::vector<Click> &clicks) {
  json arr = json::array();
  for (const Click &c : clicks) {
    arr.push_back({{"pos", ivec(c.pos)}, {"polarity", c.polarity == Polarity::Positive ? "pos" : "neg"}});
  }
  return arr;
}

std::vector<Click> clicks_from_json(const json &arr) {
  if (!arr.is_array()) {
    throw Error(Errc::FormatError, "clicks must be a JSON array");
  }
  std::vector<Click> out;
  for (const json &c : arr) {
    if (!c.is_object() || !c.contains("pos") || !c.contains("polarity") || !c["pos"].is_array() ||
        c["pos"].size() != 3 || !c["polarity"].is_string()) {
      throw Error(Errc::FormatError, "click needs pos:[i,j,k] and polarity");
    }
    for (const json &v : c["pos"]) {
      if (!v.is_number_integer()) {
        throw Error(Errc::FormatError, "click pos must be integers");
      }
    }
    const std::string pol = c["polarity"].get<std::string>();
    if (pol != "pos" && pol != "neg") {
      throw Error(Errc::FormatError, "click polarity must be \"pos\" or \"neg\"");
    }
    out.push_back({{c["pos"][0].get<int>(), c["pos"][1].get<int>(), c["pos"][2].get<int>()},
                   pol == "pos" ? Polarity::Positive : Polarity::Negative});
  }
  return out;
}

// Options shared by every command that trains or infers.
struct ModelOptions {
  TrainConfig cfg;
  int connectivity = 26;
  bool replace_clicks = false;
  double box_prior = kDefaultBoxPrior;

  void add_inference(CLI::App *cmd) {
    cmd->add_option("--tau", cfg.dose.tau, "relative dose threshold")->capture_default_str();
    cmd->add_option("--connectivity", connectivity, "6, 18 or 26")->capture_default_str();
    cmd->add_option("--threshold", cfg.prediction_threshold, "probability threshold")->capture_default_str();
    cmd->add_option("--decay-scale", cfg.decay_scale_mm, "prompt decay scale (mm)")->capture_default_str();
  }

  void add_training(CLI::App *cmd) {
    add_inference(cmd);
    cmd->add_option("--epochs", cfg.epochs)->capture_default_str();
    cmd->add_option("--lr", cfg.learning_rate)->capture_default_str();
    cmd->add_option("--iterations", cfg.clicks.iterations, "click refinement rounds")->capture_default_str();
    cmd->add_option("--clicks-per-iter", cfg.clicks.clicks_per_iteration)->capture_default_str();
    cmd->add_flag("--replace-clicks", replace_clicks, "drop earlier rounds' clicks");
    cmd->add_option("--box-prior", box_prior, "initial inside-box logit")->capture_default_str();
    cmd->add_option("--lambda1", cfg.loss.lambda1)->capture_default_str();
    cmd->add_option("--lambda2", cfg.loss.lambda2)->capture_default_str();
    cmd->add_option("--alpha", cfg.loss.alpha)->capture_default_str();
    cmd->add_option("--beta", cfg.loss.beta)->capture_default_str();
    cmd->add_option("--gamma", cfg.loss.gamma)->capture_default_str();
    cmd->add_option("--eps", cfg.loss.epsilon)->capture_default_str();
  }

  TrainConfig finish() {
    cfg.dose.connectivity = connectivity_from_int(connectivity);
    cfg.clicks.accumulate = !replace_clicks;
    cfg.seed = g_opts.seed;
    cfg.validate();
    return cfg;
  }
};

std::vector<Case> load_manifest_cases(const fs::path &manifest) {
  return load_cases(read_manifest(manifest));
}

int cmd_phantom(const std::vector<std::string> &tasks, int n, const fs::path &out_dir) {
  if (n < 1) {
    throw Error(Errc::InvalidArgument, "--n must be >= 1");
  }
  std::vector<Task> parsed;
  for (const std::string &t : tasks) {
    parsed.push_back(task_from_string(t));
  }
  std::vector<ManifestEntry> entries;
  json cases = json::array();
  for (const Task task : parsed) {
    const std::vector<PhantomCase> data = generate_dataset(task, static_cast<std::size_t>(n), g_opts.seed);
    for (std::size_t i = 0; i < data.size(); ++i) {
      char id[64];
      std::snprintf(id, sizeof id, "%s_%03zu", std::string(to_string(task)).c_str(), i);
      const PhantomCase &c = data[i];
      ManifestEntry e{id, fs::path(id + std::string("_image")), fs::path(id + std::string("_dose")),
                      fs::path(id + std::string("_gt")), fs::path(id + std::string("_text.json")), {}};
      mv1::write_volume(c.image, out_dir / e.image);
      mv1::write_volume(c.dose, out_dir / e.dose);
      mv1::write_mask(c.gt, out_dir / e.gt);
      write_text_record(c.text, (out_dir / e.text).string());
      cases.push_back({{"id", id}, {"task", to_string(task)}, {"gt_voxels", count(c.gt)},
                       {"d_max_gy", max_positive_dose(c.dose)}});
      note(std::string(id) + ": " + std::to_string(count(c.gt)) + " lesion voxels");
      entries.push_back(std::move(e));
    }
  }
  const fs::path manifest = out_dir / "manifest.json";
  write_manifest(entries, manifest);
  emit({{"manifest", manifest.generic_string()}, {"seed", g_opts.seed}, {"cases", cases}});
  return 0;
}

int cmd_prompt_box(const fs::path &dose_path, double tau, int connectivity, const std::string &out) {
  const DosePromptConfig cfg{tau, connectivity_from_int(connectivity)};
  cfg.validate();
  const Volume dose = mv1::read_volume(dose_path);
  const DosePrompt p = derive_dose_prompt(dose, cfg);
  if (!out.empty()) {
    mv1::write_mask(p.roi, out);
  }
  emit({{"corner_min", ivec(p.box.corner_min)}, {"corner_max", ivec(p.box.corner_max)},
        {"d_max_gy", p.d_max}, {"tau", tau}, {"connectivity", connectivity}, {"roi_voxels", count(p.roi)}});
  return 0;
}

int cmd_clicks(const fs::path &pred_path, const fs::path &gt_path, int n) {
  if (n < 0) {
    throw Error(Errc::InvalidArgument, "--n must be >= 0");
  }
  const Mask pred = mv1::read_mask(pred_path);
  const Mask gt = mv1::read_mask(gt_path);
  const ErrorRegions err = error_regions(pred, gt);
  SeededRng rng(g_opts.seed);
  const std::vector<Click> clicks = sample_clicks(err.fn, err.fp, static_cast<std::size_t>(n), rng);
  note("fn " + std::to_string(count(err.fn)) + ", fp " + std::to_string(count(err.fp)) + ", clicks " +
       std::to_string(clicks.size()));
  emit(clicks_to_json(clicks));
  return 0;
}

int cmd_loss(const fs::path &pred_path, const fs::path &gt_path, const fs::path &roi_path, const LossParams &params) {
  params.validate();
  const ProbVolume p = mv1::read_prob(pred_path);
  const Mask gt = mv1::read_mask(gt_path);
  const Mask roi = mv1::read_mask(roi_path);
  const LossTerms t = stf_terms(p, gt, roi, params);
  emit({{"dice_roi", t.dice}, {"ft_roi", t.focal_tversky}, {"stf", t.stf}});
  return 0;
}

int cmd_eval(const std::string &pred_path, const std::string &gt_path, const std::string &batch) {
  if (batch.empty()) {
    if (pred_path.empty() || gt_path.empty()) {
      throw Error(Errc::InvalidArgument, "eval needs --pred and --gt, or --batch");
    }
    emit(to_json(evaluate(mv1::read_mask(pred_path), mv1::read_mask(gt_path))));
    return 0;
  }
  const std::vector<ManifestEntry> entries = read_manifest(batch);
  for (const ManifestEntry &e : entries) {
    if (e.pred.empty() || e.gt.empty()) {
      throw Error(Errc::FormatError, "batch entry '" + e.id + "' needs pred and gt");
    }
  }
  std::vector<MetricsReport> reports;
  json rows = json::array();
  for (const ManifestEntry &e : entries) {
    reports.push_back(evaluate(mv1::read_mask(e.pred), mv1::read_mask(e.gt)));
    json row = to_json(reports.back());
    row["id"] = e.id;
    rows.push_back(std::move(row));
  }
  const MetricsSummary s = summarize(reports);
  char line[200];
  std::snprintf(line, sizeof line, "Dice %.4f +- %.4f  IoU %.4f +- %.4f  HD95 %.3f +- %.3f mm (n=%zu)\n",
                s.dice.mean, s.dice.std, s.iou.mean, s.iou.std, s.hd95_mm.mean, s.hd95_mm.std, s.hd95_mm.n);
  note(line);
  emit({{"cases", rows}, {"summary", to_json(s)}});
  return 0;
}

int cmd_train(const fs::path &manifest, const fs::path &out, ModelOptions &opts) {
  const TrainConfig cfg = opts.finish();
  const std::vector<Case> cases = load_manifest_cases(manifest);
  const TrainResult r = train(cases, cfg, box_prior_model(opts.box_prior));
  write_json_file(to_json(r.model), out);
  note("epoch 0 loss " + std::to_string(r.epoch_loss.front()) + ", last " + std::to_string(r.epoch_loss.back()));
  emit({{"model", out.generic_string()},
        {"cases", cases.size()},
        {"epochs", cfg.epochs},
        {"seed", cfg.seed},
        {"final_loss", r.epoch_loss.back()},
        {"epoch_loss", r.epoch_loss}});
  return 0;
}

int cmd_predict(const fs::path &model_path, const fs::path &image, const fs::path &dose, const fs::path &text,
                const fs::path &out, const std::string &clicks_path, const std::string &prob_out,
                ModelOptions &opts) {
  const TrainConfig cfg = opts.finish();
  const RefinerModel model = model_from_json(read_json_file(model_path));
  const std::vector<Click> clicks = clicks_path.empty() ? std::vector<Click>{} : clicks_from_json(read_json_file(clicks_path));
  const Volume img = mv1::read_volume(image);
  const Volume d = mv1::read_volume(dose);
  const TextPromptRecord rec = read_text_record(text.string());
  const ProbVolume p = infer_probability(model, img, d, rec, cfg, clicks);
  const Mask m = binarize(p, cfg.prediction_threshold);
  mv1::write_mask(m, out);
  if (!prob_out.empty()) {
    mv1::write_prob(p, prob_out);
  }
  const BoxPrompt3D box = dose_guided_box(d, cfg.dose);
  emit({{"mask", out.generic_string()},
        {"voxels", count(m)},
        {"task", to_string(rec.task)},
        {"clicks", clicks.size()},
        {"box", {{"corner_min", ivec(box.corner_min)}, {"corner_max", ivec(box.corner_max)}}}});
  return 0;
}

struct SweepInputs {
  std::string manifest;
  std::string eval_manifest;
  int parallel = 1;

  std::pair<std::vector<Case>, std::vector<Case>> load() const {
    std::vector<Case> tr = load_manifest_cases(manifest);
    std::vector<Case> ev = eval_manifest.empty() ? tr : load_manifest_cases(eval_manifest);
    return {std::move(tr), std::move(ev)};
  }
};

int cmd_sweep_tau(const SweepInputs &in, const std::vector<double> &taus, ModelOptions &opts) {
  const TrainConfig cfg = opts.finish();
  for (double t : taus) {
    DosePromptConfig{t, cfg.dose.connectivity}.validate();
  }
  const auto [tr, ev] = in.load();
  const SweepReport r = sweep_tau(tr, ev, taus, cfg, in.parallel);
  note(format_table(r));
  emit(to_json(r));
  return r.ok() ? 0 : 1;
}

int cmd_sweep_clicks(const SweepInputs &in, const std::vector<int> &iterations, const std::vector<int> &clicks,
                     ModelOptions &opts) {
  const TrainConfig cfg = opts.finish();
  for (int n : iterations) {
    ClickSchedule{n, cfg.clicks.clicks_per_iteration, cfg.clicks.accumulate}.validate();
  }
  for (int n : clicks) {
    ClickSchedule{cfg.clicks.iterations, n, cfg.clicks.accumulate}.validate();
  }
  if (iterations.empty() && clicks.empty()) {
    throw Error(Errc::InvalidArgument, "nothing to sweep");
  }
  const auto [tr, ev] = in.load();
  json out = json::object();
  bool ok = true;
  if (!iterations.empty()) {
    const SweepReport r = sweep_iterations(tr, ev, iterations, cfg, in.parallel);
    note(format_table(r));
    out["iterations"] = to_json(r);
    ok = ok && r.ok();
  }
  if (!clicks.empty()) {
    const SweepReport r = sweep_clicks_per_iteration(tr, ev, clicks, cfg, in.parallel);
    note(format_table(r));
    out["clicks_per_iteration"] = to_json(r);
    ok = ok && r.ok();
  }
  emit(out);
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Dose-, text- and click-prompted lesion segmentation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file supplying flags");
  app.add_option("--seed", g_opts.seed, "master random seed")->capture_default_str();
  app.add_flag("--verbose,-v", g_opts.verbose, "human-readable tables on stderr");
  app.add_flag("--json", g_opts.compact, "single-line JSON on stdout");

  std::function<int()> run;

  // phantom
  std::vector<std::string> ph_tasks{"ORN"};
  int ph_n = 1;
  std::string ph_out;
  auto *ph = app.add_subcommand("phantom", "generate synthetic cases and a manifest");
  ph->add_option("--task", ph_tasks, "ORN, CE, CRN (comma list allowed)")->delimiter(',')->capture_default_str();
  ph->add_option("--n", ph_n, "cases per task")->capture_default_str();
  ph->add_option("--out", ph_out, "output directory")->required();
  ph->callback([&] { run = [&] { return cmd_phantom(ph_tasks, ph_n, ph_out); }; });

  // prompt-box
  std::string pb_dose, pb_out;
  double pb_tau = 0.8;
  int pb_conn = 26;
  auto *pb = app.add_subcommand("prompt-box", "dose-guided ROI and box");
  pb->add_option("--dose", pb_dose)->required();
  pb->add_option("--tau", pb_tau)->capture_default_str();
  pb->add_option("--connectivity", pb_conn)->capture_default_str();
  pb->add_option("--out", pb_out, "write the ROI mask here");
  pb->callback([&] { run = [&] { return cmd_prompt_box(pb_dose, pb_tau, pb_conn, pb_out); }; });

  // clicks
  std::string ck_pred, ck_gt;
  int ck_n = 4;
  auto *ck = app.add_subcommand("clicks", "simulate clicks from prediction errors");
  ck->add_option("--pred", ck_pred)->required();
  ck->add_option("--gt", ck_gt)->required();
  ck->add_option("--n", ck_n)->capture_default_str();
  ck->callback([&] { run = [&] { return cmd_clicks(ck_pred, ck_gt, ck_n); }; });

  // loss
  std::string ls_pred, ls_gt, ls_roi;
  LossParams ls_params;
  auto *ls = app.add_subcommand("loss", "ROI-restricted Dice, focal Tversky and combined loss");
  ls->add_option("--pred", ls_pred, "probability volume")->required();
  ls->add_option("--gt", ls_gt)->required();
  ls->add_option("--roi", ls_roi)->required();
  ls->add_option("--lambda1", ls_params.lambda1)->capture_default_str();
  ls->add_option("--lambda2", ls_params.lambda2)->capture_default_str();
  ls->add_option("--alpha", ls_params.alpha)->capture_default_str();
  ls->add_option("--beta", ls_params.beta)->capture_default_str();
  ls->add_option("--gamma", ls_params.gamma)->capture_default_str();
  ls->add_option("--eps", ls_params.epsilon)->capture_default_str();
  ls->callback([&] { run = [&] { return cmd_loss(ls_pred, ls_gt, ls_roi, ls_params); }; });

  // eval
  std::string ev_pred, ev_gt, ev_batch;
  auto *ev = app.add_subcommand("eval", "overlap and surface-distance metrics");
  ev->add_option("--pred", ev_pred);
  ev->add_option("--gt", ev_gt);
  ev->add_option("--batch", ev_batch, "manifest with pred/gt entries");
  ev->callback([&] { run = [&] { return cmd_eval(ev_pred, ev_gt, ev_batch); }; });

  // train
  std::string tr_manifest, tr_out;
  ModelOptions tr_opts;
  auto *tr = app.add_subcommand("train", "train the prompt-conditioned refiner");
  tr->add_option("--manifest", tr_manifest)->required();
  tr->add_option("--out", tr_out, "model JSON")->required();
  tr_opts.add_training(tr);
  tr->callback([&] { run = [&] { return cmd_train(tr_manifest, tr_out, tr_opts); }; });

  // predict
  std::string pr_model, pr_image, pr_dose, pr_text, pr_out, pr_clicks, pr_prob;
  ModelOptions pr_opts;
  auto *pr = app.add_subcommand("predict", "segment one case");
  pr->add_option("--model", pr_model)->required();
  pr->add_option("--image", pr_image)->required();
  pr->add_option("--dose", pr_dose)->required();
  pr->add_option("--text", pr_text)->required();
  pr->add_option("--out", pr_out, "mask output")->required();
  pr->add_option("--clicks", pr_clicks, "optional manual clicks (JSON array)");
  pr->add_option("--prob-out", pr_prob, "also write the probability map");
  pr_opts.add_inference(pr);
  pr->callback([&] {
    run = [&] { return cmd_predict(pr_model, pr_image, pr_dose, pr_text, pr_out, pr_clicks, pr_prob, pr_opts); };
  });

  // sweep-tau
  SweepInputs st_in;
  std::vector<double> st_taus{0.5, 0.6, 0.7, 0.8, 0.9};
  ModelOptions st_opts;
  auto *st = app.add_subcommand("sweep-tau", "train and evaluate over dose thresholds");
  st->add_option("--manifest", st_in.manifest, "training cases")->required();
  st->add_option("--eval-manifest", st_in.eval_manifest, "held-out cases (default: training cases)");
  st->add_option("--taus", st_taus)->delimiter(',')->capture_default_str();
  st->add_option("--parallel", st_in.parallel, "concurrent configurations")->capture_default_str();
  st_opts.add_training(st);
  st->callback([&] { run = [&] { return cmd_sweep_tau(st_in, st_taus, st_opts); }; });

  // sweep-clicks
  SweepInputs sc_in;
  std::vector<int> sc_iters{0, 1, 3, 5}, sc_clicks{2, 4, 6};
  ModelOptions sc_opts;
  auto *sc = app.add_subcommand("sweep-clicks", "vary refinement iterations, then clicks per iteration");
  sc->add_option("--manifest", sc_in.manifest, "training cases")->required();
  sc->add_option("--eval-manifest", sc_in.eval_manifest, "held-out cases (default: training cases)");
  sc->add_option("--iterations-list", sc_iters)->delimiter(',')->capture_default_str();
  sc->add_option("--clicks-list", sc_clicks)->delimiter(',')->capture_default_str();
  sc->add_option("--parallel", sc_in.parallel, "concurrent configurations")->capture_default_str();
  sc_opts.add_training(sc);
  sc->callback([&] { run = [&] { return cmd_sweep_clicks(sc_in, sc_iters, sc_clicks, sc_opts); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    return run();
  } catch (const Error &e) {
    std::cerr << json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    return 3;
  }
}

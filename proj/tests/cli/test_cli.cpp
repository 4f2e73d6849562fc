#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "rtprompt/grid.hpp"
#include "rtprompt/mv1.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int rc = -1;
  std::string out, err;
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path work_dir() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "rtprompt_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run cli(const std::string &args) {
  const fs::path o = work_dir() / "stdout", e = work_dir() / "stderr";
  const std::string cmd = std::string("'") + RTPROMPT_CLI + "' " + args + " > '" + o.string() + "' 2> '" + e.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

std::string q(const fs::path &p) { return "'" + p.string() + "'"; }

// Three ORN phantoms shared by the pipeline tests.
const fs::path &phantoms() {
  static const fs::path dir = [] {
    const fs::path d = work_dir() / "ph";
    const Run r = cli("--seed 3 phantom --task ORN --n 3 --out " + q(d));
    REQUIRE(r.rc == 0);
    return d;
  }();
  return dir;
}

} // namespace

TEST_CASE("phantom writes volumes and a relative manifest") {
  const fs::path d = phantoms();
  const json m = json::parse(slurp(d / "manifest.json"));
  REQUIRE(m.size() == 3);
  CHECK(m[0]["id"] == "ORN_000");
  CHECK(fs::path(m[0]["image"].get<std::string>()).is_relative());
  CHECK(fs::exists(d / "ORN_002_gt.mv1.json"));
  CHECK(fs::exists(d / "ORN_002_text.json"));
}

TEST_CASE("prompt-box reports the box and writes the roi") {
  const Run r = cli("prompt-box --dose " + q(phantoms() / "ORN_000_dose") + " --tau 0.7 --out " +
                    q(work_dir() / "roi"));
  REQUIRE(r.rc == 0);
  const json j = json::parse(r.out);
  CHECK(j["tau"] == 0.7);
  CHECK(j["roi_voxels"].get<int>() > 0);
  const auto roi = rtprompt::mv1::read_mask(work_dir() / "roi");
  CHECK(rtprompt::count(roi) == j["roi_voxels"].get<std::size_t>());
}

TEST_CASE("eval of a mask against itself is perfect") {
  const fs::path gt = phantoms() / "ORN_001_gt";
  const Run r = cli("eval --pred " + q(gt) + " --gt " + q(gt));
  REQUIRE(r.rc == 0);
  const json j = json::parse(r.out);
  CHECK(j["dice"] == 1.0);
  CHECK(j["hd95_mm"] == 0.0);
}

TEST_CASE("clicks on a perfect prediction are empty") {
  const fs::path gt = phantoms() / "ORN_001_gt";
  const Run r = cli("clicks --pred " + q(gt) + " --gt " + q(gt) + " --n 4");
  REQUIRE(r.rc == 0);
  CHECK(json::parse(r.out).empty());
}

TEST_CASE("--json gives one line, default output is indented") {
  const fs::path gt = phantoms() / "ORN_001_gt";
  const Run compact = cli("--json eval --pred " + q(gt) + " --gt " + q(gt));
  const Run pretty = cli("eval --pred " + q(gt) + " --gt " + q(gt));
  CHECK(compact.out.find('\n') == compact.out.size() - 1);
  CHECK(pretty.out.find("\n  ") != std::string::npos);
  CHECK(json::parse(compact.out) == json::parse(pretty.out));
}

TEST_CASE("train then predict") {
  const fs::path model = work_dir() / "model.json";
  const Run t = cli("train --manifest " + q(phantoms() / "manifest.json") + " --out " + q(model) + " --epochs 3");
  REQUIRE(t.rc == 0);
  const json tj = json::parse(t.out);
  CHECK(tj["epochs"] == 3);
  CHECK(tj["epoch_loss"].size() == 3);
  const json mj = json::parse(slurp(model));
  CHECK(mj["shared_weights"].size() == 7);

  const fs::path d = phantoms();
  const Run p = cli("predict --model " + q(model) + " --image " + q(d / "ORN_002_image") + " --dose " +
                    q(d / "ORN_002_dose") + " --text " + q(d / "ORN_002_text.json") + " --out " +
                    q(work_dir() / "pred"));
  REQUIRE(p.rc == 0);
  const json pj = json::parse(p.out);
  CHECK(pj["task"] == "ORN");
  CHECK(pj["clicks"] == 0);
  CHECK(fs::exists(work_dir() / "pred.mv1.raw"));
}

TEST_CASE("config file supplies flags and the command line overrides it") {
  const fs::path cfg = work_dir() / "cfg.json";
  std::ofstream(cfg) << R"({"seed": 5, "train": {"epochs": 2, "tau": 0.7}})";
  const std::string base = "--config " + q(cfg) + " train --manifest " + q(phantoms() / "manifest.json") +
                           " --out " + q(work_dir() / "m2.json");
  const Run from_file = cli(base);
  REQUIRE(from_file.rc == 0);
  CHECK(json::parse(from_file.out)["epochs"] == 2);
  CHECK(json::parse(from_file.out)["seed"] == 5);
  const Run overridden = cli(base + " --epochs 1");
  REQUIRE(overridden.rc == 0);
  CHECK(json::parse(overridden.out)["epochs"] == 1);
}

TEST_CASE("library errors exit 2 with a JSON error on stderr") {
  const Run r = cli("prompt-box --dose " + q(phantoms() / "ORN_000_dose") + " --tau 1.5");
  CHECK(r.rc == 2);
  CHECK(r.out.empty());
  CHECK(json::parse(r.err)["error"] == "InvalidArgument");

  const Run missing = cli("eval --pred " + q(work_dir() / "nope") + " --gt " + q(work_dir() / "nope"));
  CHECK(missing.rc == 2);
  CHECK(json::parse(missing.err)["error"] == "FormatError");
}

TEST_CASE("sweep validates every value before training") {
  const Run r = cli("sweep-tau --manifest " + q(phantoms() / "manifest.json") + " --taus 0.8,1.5 --epochs 1");
  CHECK(r.rc == 2);
  CHECK(json::parse(r.err)["error"] == "InvalidArgument");
}

TEST_CASE("sweep-tau emits one row per tau") {
  const Run r = cli("--json sweep-tau --manifest " + q(phantoms() / "manifest.json") + " --taus 0.8,0.6 --epochs 2");
  REQUIRE(r.rc == 0);
  const json j = json::parse(r.out);
  CHECK(j["parameter"] == "tau");
  REQUIRE(j["rows"].size() == 2);
  CHECK(j["rows"][0]["value"] == 0.6);
}

TEST_CASE("unknown subcommand or missing required flag is a usage error") {
  CHECK(cli("frobnicate").rc != 0);
  CHECK(cli("train --out x.json").rc != 0);
}

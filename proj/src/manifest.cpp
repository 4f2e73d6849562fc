#include "rtprompt/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "rtprompt/mv1.hpp"

namespace rtprompt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Field {
  const char *name;
  fs::path ManifestEntry::*member;
};

constexpr Field kFields[] = {{"image", &ManifestEntry::image},
                             {"dose", &ManifestEntry::dose},
                             {"gt", &ManifestEntry::gt},
                             {"text", &ManifestEntry::text},
                             {"pred", &ManifestEntry::pred}};

void require(const fs::path &p, const ManifestEntry &e, const char *what) {
  if (p.empty()) {
    throw Error(Errc::FormatError, "manifest entry '" + e.id + "' has no " + what);
  }
}

} // namespace

std::vector<ManifestEntry> read_manifest(const fs::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::FormatError, "cannot open manifest " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception &ex) {
    throw Error(Errc::FormatError, "manifest " + path.string() + ": " + ex.what());
  }
  if (!doc.is_array()) {
    throw Error(Errc::FormatError, "manifest must be a JSON array");
  }
  const fs::path base = path.parent_path();
  std::vector<ManifestEntry> out;
  for (std::size_t n = 0; n < doc.size(); ++n) {
    const json &j = doc[n];
    if (!j.is_object()) {
      throw Error(Errc::FormatError, "manifest entry " + std::to_string(n) + " is not an object");
    }
    ManifestEntry e;
    e.id = std::to_string(n);
    if (j.contains("id")) {
      if (!j["id"].is_string()) {
        throw Error(Errc::FormatError, "manifest id must be a string");
      }
      e.id = j["id"].get<std::string>();
    }
    for (const Field &f : kFields) {
      if (!j.contains(f.name)) {
        continue;
      }
      if (!j[f.name].is_string()) {
        throw Error(Errc::FormatError, std::string("manifest field '") + f.name + "' must be a string");
      }
      const fs::path p = j[f.name].get<std::string>();
      e.*f.member = p.is_absolute() ? p : base / p;
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::vector<ManifestEntry> &entries, const fs::path &path) {
  json doc = json::array();
  for (const ManifestEntry &e : entries) {
    json j = json::object();
    j["id"] = e.id;
    for (const Field &f : kFields) {
      if (!(e.*f.member).empty()) {
        j[f.name] = (e.*f.member).generic_string();
      }
    }
    doc.push_back(std::move(j));
  }
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) {
    throw Error(Errc::FormatError, "cannot write manifest " + path.string());
  }
}

Case load_case(const ManifestEntry &e) {
  require(e.image, e, "image");
  require(e.dose, e, "dose");
  require(e.gt, e, "gt");
  require(e.text, e, "text");
  Case c{mv1::read_volume(e.image), mv1::read_volume(e.dose), mv1::read_mask(e.gt), read_text_record(e.text.string())};
  require_same_grid(c.image.geometry(), c.dose.geometry(), "case " + e.id + " (image vs dose)");
  require_same_grid(c.image.geometry(), c.gt.geometry(), "case " + e.id + " (image vs gt)");
  return c;
}

std::vector<Case> load_cases(const std::vector<ManifestEntry> &entries) {
  std::vector<Case> out;
  out.reserve(entries.size());
  for (const ManifestEntry &e : entries) {
    out.push_back(load_case(e));
  }
  return out;
}

} // namespace rtprompt

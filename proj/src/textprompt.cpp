#include "rtprompt/textprompt.hpp"

#include <cmath>
#include <fstream>

#include "rtprompt/error.hpp"

namespace rtprompt {

using nlohmann::json;

std::string_view to_string(Task task) noexcept {
  switch (task) {
  case Task::ORN: return "ORN";
  case Task::CE: return "CE";
  case Task::CRN: return "CRN";
  }
  return "ORN";
}

Task task_from_string(std::string_view name) {
  if (name == "ORN") {
    return Task::ORN;
  }
  if (name == "CE") {
    return Task::CE;
  }
  if (name == "CRN") {
    return Task::CRN;
  }
  throw Error(Errc::InvalidArgument, "unknown task '" + std::string(name) + "' (expected ORN, CE or CRN)");
}

Task TaskEmbedding::task() const noexcept {
  std::size_t best = 0;
  for (std::size_t t = 1; t < kTaskCount; ++t) {
    if (task_onehot[t] > task_onehot[best]) {
      best = t;
    }
  }
  return static_cast<Task>(best);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

TaskEmbedding featurize_text(const TextPromptRecord &rec) {
  TaskEmbedding e;
  e.task_onehot[static_cast<std::size_t>(rec.task)] = 1.0;

  // std::map iterates in key order, so insertion order never matters
  const auto add_section = [&](std::string_view section, const std::map<std::string, std::string> &entries) {
    for (const auto &[key, value] : entries) {
      const std::uint64_t h = fnv1a64(std::string(section) + ":" + key + "=" + value);
      const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
      e.aux_features[h % kAuxFeatures] += sign;
    }
  };
  add_section("clinical", rec.clinical);
  add_section("demographic", rec.demographic);

  double norm2 = 0.0;
  for (double v : e.aux_features) {
    norm2 += v * v;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double &v : e.aux_features) {
      v *= inv;
    }
  }
  return e;
}

json to_json(const TextPromptRecord &rec) {
  return json{{"task", std::string(to_string(rec.task))}, {"clinical", rec.clinical}, {"demographic", rec.demographic}};
}

TextPromptRecord text_record_from_json(const json &j) {
  if (!j.is_object() || !j.contains("task") || !j["task"].is_string()) {
    throw Error(Errc::FormatError, "text prompt needs a string 'task' field");
  }
  TextPromptRecord rec;
  try {
    rec.task = task_from_string(j["task"].get<std::string>());
  } catch (const Error &e) {
    throw Error(Errc::FormatError, e.what());
  }
  const auto read_map = [&](const char *key, std::map<std::string, std::string> &out) {
    if (!j.contains(key)) {
      return;
    }
    const json &m = j[key];
    if (!m.is_object()) {
      throw Error(Errc::FormatError, std::string("text prompt field '") + key + "' must be an object");
    }
    for (const auto &[k, v] : m.items()) {
      if (!v.is_string()) {
        throw Error(Errc::FormatError, std::string("text prompt field '") + key + "." + k + "' must be a string");
      }
      out[k] = v.get<std::string>();
    }
  };
  read_map("clinical", rec.clinical);
  read_map("demographic", rec.demographic);
  return rec;
}

TextPromptRecord read_text_record(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::FormatError, "cannot open text prompt " + path);
  }
  try {
    return text_record_from_json(json::parse(in));
  } catch (const json::exception &e) {
    throw Error(Errc::FormatError, path + ": " + e.what());
  }
}

void write_text_record(const TextPromptRecord &rec, const std::string &path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(Errc::InvalidArgument, "cannot write " + path);
  }
  out << to_json(rec).dump(2) << '\n';
}

} // namespace rtprompt

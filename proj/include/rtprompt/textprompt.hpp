#pragma once

// Structured text prompt and its deterministic featurizer.
//
// The task field is one-hot encoded. Every clinical and demographic entry
// becomes the string "<section>:<key>=<value>" ("clinical" or
// "demographic"); entries are hashed with 64-bit FNV-1a into kAuxFeatures
// buckets (bucket = h mod F, sign = +1 if bit 63 of h is clear, else -1),
// summed, and the vector is L2-normalised (left at zero when no entries).

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace rtprompt {

enum class Task { ORN = 0, CE = 1, CRN = 2 };

inline constexpr std::size_t kTaskCount = 3;
inline constexpr std::size_t kAuxFeatures = 16;

std::string_view to_string(Task task) noexcept;
/// "ORN", "CE" or "CRN"; anything else is InvalidArgument.
Task task_from_string(std::string_view name);

struct TextPromptRecord {
  Task task = Task::ORN;
  std::map<std::string, std::string> clinical;
  std::map<std::string, std::string> demographic;

  friend bool operator==(const TextPromptRecord &, const TextPromptRecord &) = default;
};

struct TaskEmbedding {
  std::array<double, kTaskCount> task_onehot{};
  std::array<double, kAuxFeatures> aux_features{};

  /// Recovers the task from the one-hot part.
  Task task() const noexcept;

  friend bool operator==(const TaskEmbedding &, const TaskEmbedding &) = default;
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

TaskEmbedding featurize_text(const TextPromptRecord &rec);

nlohmann::json to_json(const TextPromptRecord &rec);
/// Throws FormatError on a missing/unknown task or non-string map values.
TextPromptRecord text_record_from_json(const nlohmann::json &j);

TextPromptRecord read_text_record(const std::string &path);
void write_text_record(const TextPromptRecord &rec, const std::string &path);

} // namespace rtprompt

#pragma once

// Case manifests: a JSON array of objects with file paths
//   {"id": ..., "image": ..., "dose": ..., "gt": ..., "text": ...}
// Volumes are MV1 stems, text is a TextPromptRecord JSON file. An entry may
// instead (or also) carry "pred" for batch evaluation. Relative paths are
// taken relative to the manifest's directory.

#include <filesystem>
#include <string>
#include <vector>

#include "rtprompt/case.hpp"

namespace rtprompt {

struct ManifestEntry {
  std::string id;
  std::filesystem::path image, dose, gt, text, pred;
};

/// Throws FormatError when the document is not an array of objects or a
/// field has the wrong type.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path &path);

/// Paths are written as stored (relative stays relative).
void write_manifest(const std::vector<ManifestEntry> &entries, const std::filesystem::path &path);

/// Needs image, dose, gt and text. Throws FormatError if any is missing.
Case load_case(const ManifestEntry &entry);
std::vector<Case> load_cases(const std::vector<ManifestEntry> &entries);

} // namespace rtprompt

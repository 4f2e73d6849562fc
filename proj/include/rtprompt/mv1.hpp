#pragma once

// MV1 volume files.
//
// A volume named <stem> is stored as two files:
//   <stem>.mv1.json  header {magic:"MV1", dtype, dims:[nx,ny,nz],
//                            spacing_mm:[sx,sy,sz], origin_mm:[ox,oy,oz],
//                            axis_order:"x-fastest"}
//   <stem>.mv1.raw   little-endian payload of exactly nx*ny*nz elements
//
// dtype is "f32" for images and dose maps, "u8" (0/1) for masks and "f64"
// for probability maps. Readers accept the stem or either file path.

#include <filesystem>
#include <string>

#include "rtprompt/grid.hpp"

namespace rtprompt::mv1 {

struct Paths {
  std::filesystem::path header;
  std::filesystem::path payload;
};

/// Resolves "<stem>", "<stem>.mv1", "<stem>.mv1.json" or "<stem>.mv1.raw".
Paths resolve(const std::filesystem::path &path);

void write_volume(const Volume &vol, const std::filesystem::path &path);
void write_mask(const Mask &mask, const std::filesystem::path &path);
void write_prob(const ProbVolume &prob, const std::filesystem::path &path);

/// All readers throw FormatError on a malformed header, a payload whose
/// length disagrees with the dims, non-finite samples, or values outside
/// the type's domain.
Volume read_volume(const std::filesystem::path &path);
Mask read_mask(const std::filesystem::path &path);
/// Accepts f32 or f64 payloads.
ProbVolume read_prob(const std::filesystem::path &path);

} // namespace rtprompt::mv1

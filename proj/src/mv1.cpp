#include "rtprompt/mv1.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <json.hpp>

namespace rtprompt::mv1 {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kHeaderSuffix = ".mv1.json";
constexpr std::string_view kPayloadSuffix = ".mv1.raw";

bool ends_with(const std::string &s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

[[noreturn]] void format_error(const fs::path &path, const std::string &what) {
  throw Error(Errc::FormatError, path.string() + ": " + what);
}

template <typename T>
void to_little_endian(std::vector<unsigned char> &bytes) {
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    for (std::size_t o = 0; o < bytes.size(); o += sizeof(T)) {
      std::reverse(bytes.begin() + static_cast<std::ptrdiff_t>(o),
                   bytes.begin() + static_cast<std::ptrdiff_t>(o + sizeof(T)));
    }
  }
}

template <typename T>
void write_grid(const Grid<T> &grid, const fs::path &path, std::string_view dtype) {
  const Paths p = resolve(path);
  if (p.header.has_parent_path()) {
    fs::create_directories(p.header.parent_path());
  }
  const Geometry &g = grid.geometry();
  json header = {
      {"magic", "MV1"},
      {"dtype", dtype},
      {"dims", {g.dims[0], g.dims[1], g.dims[2]}},
      {"spacing_mm", {g.spacing[0], g.spacing[1], g.spacing[2]}},
      {"origin_mm", {g.origin[0], g.origin[1], g.origin[2]}},
      {"axis_order", "x-fastest"},
  };
  {
    std::ofstream out(p.header);
    if (!out) {
      throw Error(Errc::InvalidArgument, "cannot open " + p.header.string() + " for writing");
    }
    out << header.dump(2) << '\n';
  }
  std::vector<unsigned char> bytes(grid.size() * sizeof(T));
  std::memcpy(bytes.data(), grid.values().data(), bytes.size());
  to_little_endian<T>(bytes);
  std::ofstream out(p.payload, std::ios::binary);
  if (!out) {
    throw Error(Errc::InvalidArgument, "cannot open " + p.payload.string() + " for writing");
  }
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

struct Header {
  std::string dtype;
  Geometry geometry;
};

std::array<double, 3> read_triple(const json &h, const char *key, const fs::path &path) {
  const auto it = h.find(key);
  if (it == h.end() || !it->is_array() || it->size() != 3) {
    format_error(path, std::string("field '") + key + "' must be an array of 3 numbers");
  }
  std::array<double, 3> out{};
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(*it)[a].is_number()) {
      format_error(path, std::string("field '") + key + "' must hold numbers");
    }
    out[a] = (*it)[a].get<double>();
  }
  return out;
}

Header read_header(const fs::path &path) {
  std::ifstream in(path);
  if (!in) {
    format_error(path, "cannot open header");
  }
  json h;
  try {
    h = json::parse(in);
  } catch (const json::exception &e) {
    format_error(path, std::string("header is not valid JSON: ") + e.what());
  }
  if (!h.is_object()) {
    format_error(path, "header must be a JSON object");
  }
  if (h.value("magic", std::string{}) != "MV1") {
    format_error(path, "missing or wrong magic");
  }
  if (!h.contains("axis_order") || h["axis_order"] != "x-fastest") {
    format_error(path, "axis_order must be \"x-fastest\"");
  }
  Header out;
  if (!h.contains("dtype") || !h["dtype"].is_string()) {
    format_error(path, "missing dtype");
  }
  out.dtype = h["dtype"].get<std::string>();
  if (out.dtype != "f32" && out.dtype != "u8" && out.dtype != "f64") {
    format_error(path, "unsupported dtype '" + out.dtype + "'");
  }
  const auto dims_it = h.find("dims");
  if (dims_it == h.end() || !dims_it->is_array() || dims_it->size() != 3) {
    format_error(path, "dims must be an array of 3 integers");
  }
  for (std::size_t a = 0; a < 3; ++a) {
    const json &d = (*dims_it)[a];
    if (!d.is_number_integer() || d.get<long long>() <= 0 || d.get<long long>() > (1 << 20)) {
      format_error(path, "dims must be positive integers");
    }
    out.geometry.dims[a] = d.get<int>();
  }
  out.geometry.spacing = read_triple(h, "spacing_mm", path);
  out.geometry.origin = read_triple(h, "origin_mm", path);
  try {
    out.geometry.validate();
  } catch (const Error &e) {
    format_error(path, e.what());
  }
  return out;
}

std::vector<unsigned char> read_payload(const fs::path &path, std::size_t expected_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    format_error(path, "cannot open payload");
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != expected_bytes) {
    format_error(path, "payload holds " + std::to_string(bytes.size()) + " bytes, header implies " +
                           std::to_string(expected_bytes));
  }
  return bytes;
}

template <typename T>
std::vector<T> decode(const fs::path &path, const Header &h) {
  const std::size_t n = h.geometry.voxel_count();
  std::vector<unsigned char> bytes = read_payload(path, n * sizeof(T));
  to_little_endian<T>(bytes);
  std::vector<T> out(n);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  if constexpr (std::is_floating_point_v<T>) {
    for (T v : out) {
      if (!std::isfinite(v)) {
        format_error(path, "payload contains non-finite values");
      }
    }
  }
  return out;
}

void require_dtype(const Header &h, std::string_view want, const fs::path &path) {
  if (h.dtype != want) {
    format_error(path, "expected dtype " + std::string(want) + ", found " + h.dtype);
  }
}

} // namespace

Paths resolve(const fs::path &path) {
  std::string s = path.string();
  if (ends_with(s, kHeaderSuffix)) {
    s.resize(s.size() - kHeaderSuffix.size());
  } else if (ends_with(s, kPayloadSuffix)) {
    s.resize(s.size() - kPayloadSuffix.size());
  } else if (ends_with(s, ".mv1")) {
    s.resize(s.size() - 4);
  }
  return {fs::path(s + std::string(kHeaderSuffix)), fs::path(s + std::string(kPayloadSuffix))};
}

void write_volume(const Volume &vol, const fs::path &path) { write_grid(vol, path, "f32"); }
void write_mask(const Mask &mask, const fs::path &path) { write_grid(mask, path, "u8"); }
void write_prob(const ProbVolume &prob, const fs::path &path) { write_grid(prob, path, "f64"); }

Volume read_volume(const fs::path &path) {
  const Paths p = resolve(path);
  const Header h = read_header(p.header);
  require_dtype(h, "f32", p.header);
  return Volume(h.geometry, decode<float>(p.payload, h));
}

Mask read_mask(const fs::path &path) {
  const Paths p = resolve(path);
  const Header h = read_header(p.header);
  require_dtype(h, "u8", p.header);
  std::vector<std::uint8_t> data = decode<std::uint8_t>(p.payload, h);
  for (std::uint8_t v : data) {
    if (v > 1) {
      format_error(p.payload, "mask values must be 0 or 1");
    }
  }
  return Mask(h.geometry, std::move(data));
}

ProbVolume read_prob(const fs::path &path) {
  const Paths p = resolve(path);
  const Header h = read_header(p.header);
  std::vector<double> data;
  if (h.dtype == "f64") {
    data = decode<double>(p.payload, h);
  } else if (h.dtype == "f32") {
    const std::vector<float> f = decode<float>(p.payload, h);
    data.assign(f.begin(), f.end());
  } else {
    format_error(p.header, "probability maps must be f32 or f64");
  }
  for (double v : data) {
    if (v < 0.0 || v > 1.0) {
      format_error(p.payload, "probabilities must lie in [0, 1]");
    }
  }
  return ProbVolume(h.geometry, std::move(data));
}

} // namespace rtprompt::mv1

// SPDX-License-Identifier: Apache-2.0
#include "radcount/core.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace radcount {

namespace {

constexpr char kMagic[4] = {'R', 'A', 'D', 'C'};
constexpr std::uint16_t kFormatVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

RadarCube::RadarCube(int rows_, int cols_, int frames_)
    : rows(rows_), cols(cols_), frames(frames_) {
  if (rows <= 0 || cols <= 0 || frames <= 0)
    throw std::invalid_argument("RadarCube: dimensions must be positive");
  data.assign(static_cast<std::size_t>(rows) * cols * frames, 0.0f);
}

bool RadarCube::all_finite() const {
  for (float x : data)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string to_string(Activity a) {
  switch (a) {
    case Activity::standing: return "standing";
    case Activity::walking: return "walking";
    case Activity::mixed: return "mixed";
  }
  throw std::invalid_argument("unknown activity");
}

Activity activity_from_string(const std::string& s) {
  if (s == "standing") return Activity::standing;
  if (s == "walking") return Activity::walking;
  if (s == "mixed") return Activity::mixed;
  throw std::invalid_argument("unknown activity: " + s);
}

void DatasetManifest::validate() const {
  std::set<std::string> paths;
  for (const auto& e : entries) {
    if (!paths.insert(e.path).second)
      throw std::runtime_error("manifest: duplicate path " + e.path);
    if (e.label < 0 || e.label > 3)
      throw std::runtime_error("manifest: label out of range for " + e.path);
    if (e.split != "train" && e.split != "val" && e.split != "test")
      throw std::runtime_error("manifest: unknown split '" + e.split + "' for " + e.path);
  }
}

std::vector<ManifestEntry> DatasetManifest::split(const std::string& which) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == which) out.push_back(e);
  return out;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& e : m.entries) {
    nlohmann::json j{{"path", e.path},
                     {"label", e.label},
                     {"environment", e.environment},
                     {"activity", e.activity},
                     {"split", e.split}};
    f << j.dump() << "\n";
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open manifest: " + path);
  DatasetManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    ManifestEntry e;
    e.path = j.at("path").get<std::string>();
    e.label = j.at("label").get<int>();
    e.environment = j.at("environment").get<std::string>();
    e.activity = j.at("activity").get<std::string>();
    e.split = j.at("split").get<std::string>();
    m.entries.push_back(std::move(e));
  }
  m.validate();
  return m;
}

std::string resolve_manifest_path(const std::string& manifest_path, const std::string& entry_path) {
  std::filesystem::path p(entry_path);
  if (p.is_absolute()) return entry_path;
  return (std::filesystem::path(manifest_path).parent_path() / p).string();
}

void save_cube(const RadarCube& cube, const std::string& path) {
  if (cube.rows <= 0 || cube.cols <= 0 || cube.frames <= 0)
    throw std::invalid_argument("save_cube: empty cube");
  if (cube.rows > 0xffff || cube.cols > 0xffff)
    throw std::invalid_argument("save_cube: dimension overflows u16 header field");
  if (cube.data.size() != static_cast<std::size_t>(cube.rows) * cube.cols * cube.frames)
    throw std::invalid_argument("save_cube: data size disagrees with dimensions");
  if (!cube.all_finite())
    throw std::invalid_argument("save_cube: cube contains non-finite values");

  std::string header;
  header.append(kMagic, 4);
  put_u16(header, kFormatVersion);
  put_u16(header, 0);  // reserved
  put_u16(header, static_cast<std::uint16_t>(cube.rows));
  put_u16(header, static_cast<std::uint16_t>(cube.cols));
  put_u32(header, static_cast<std::uint32_t>(cube.frames));

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::string payload;
  payload.resize(cube.data.size() * 4);
  for (std::size_t i = 0; i < cube.data.size(); ++i) {
    std::uint32_t bits;
    static_assert(sizeof(float) == 4);
    std::memcpy(&bits, &cube.data[i], 4);
    payload[4 * i + 0] = static_cast<char>(bits & 0xff);
    payload[4 * i + 1] = static_cast<char>((bits >> 8) & 0xff);
    payload[4 * i + 2] = static_cast<char>((bits >> 16) & 0xff);
    payload[4 * i + 3] = static_cast<char>((bits >> 24) & 0xff);
  }
  f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

RadarCube load_cube(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open cube file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  constexpr std::size_t kHeaderBytes = 16;
  if (bytes.size() < kHeaderBytes)
    throw std::runtime_error(path + ": truncated header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, kMagic, 4) != 0)
    throw std::runtime_error(path + ": bad magic, not a RADC file");
  const std::uint16_t version = get_u16(p + 4);
  if (version != kFormatVersion)
    throw std::runtime_error(path + ": unsupported RADC version " + std::to_string(version));
  const int rows = get_u16(p + 8);
  const int cols = get_u16(p + 10);
  const std::uint32_t frames = get_u32(p + 12);
  if (rows == 0 || cols == 0 || frames == 0)
    throw std::runtime_error(path + ": header declares empty cube");

  const std::size_t expected =
      static_cast<std::size_t>(rows) * cols * frames * 4;
  const std::size_t have = bytes.size() - kHeaderBytes;
  if (have < expected)
    throw std::runtime_error(path + ": truncated payload (" + std::to_string(have) + " of " +
                             std::to_string(expected) + " bytes)");
  if (have > expected)
    throw std::runtime_error(path + ": payload size disagrees with header dimensions");

  RadarCube cube(rows, cols, static_cast<int>(frames));
  const unsigned char* q = p + kHeaderBytes;
  for (std::size_t i = 0; i < cube.data.size(); ++i) {
    const std::uint32_t bits = get_u32(q + 4 * i);
    float x;
    std::memcpy(&x, &bits, 4);
    if (!std::isfinite(x))
      throw std::runtime_error(path + ": non-finite value in payload");
    cube.data[i] = x;
  }
  return cube;
}

RadarCube slice_window(const RadarCube& cube, int start, int length) {
  if (start < 0 || length <= 0 || start + length > cube.frames)
    throw std::out_of_range("slice_window: [" + std::to_string(start) + ", " +
                            std::to_string(start + length) + ") outside 0.." +
                            std::to_string(cube.frames));
  RadarCube out(cube.rows, cube.cols, length);
  const std::size_t frame_size = static_cast<std::size_t>(cube.rows) * cube.cols;
  std::copy(cube.data.begin() + static_cast<std::ptrdiff_t>(start * frame_size),
            cube.data.begin() + static_cast<std::ptrdiff_t>((start + length) * frame_size),
            out.data.begin());
  return out;
}

}  // namespace radcount

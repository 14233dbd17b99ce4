// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace radcount {

// Range-azimuth grid of the radar: 12 range bins x 91 azimuth bins.
inline constexpr int kGridRows = 12;
inline constexpr int kGridCols = 91;
inline constexpr int kGridCells = kGridRows * kGridCols;

/// 3-D amplitude tensor (frames x rows x cols), row-major [frame][row][col].
/// Paper-conformant cubes are 12x91xT; the type carries its dimensions so
/// window slices and test fixtures with other shapes stay representable.
struct RadarCube {
  int rows = 0;
  int cols = 0;
  int frames = 0;
  std::vector<float> data;

  RadarCube() = default;
  RadarCube(int rows_, int cols_, int frames_);

  static RadarCube sensor_sized(int frames_) { return RadarCube(kGridRows, kGridCols, frames_); }

  float& at(int f, int r, int c) {
    return data[(static_cast<std::size_t>(f) * rows + r) * cols + c];
  }
  float at(int f, int r, int c) const {
    return data[(static_cast<std::size_t>(f) * rows + r) * cols + c];
  }

  std::size_t value_count() const { return data.size(); }
  bool has_sensor_grid() const { return rows == kGridRows && cols == kGridCols; }
  bool all_finite() const;

  bool operator==(const RadarCube&) const = default;
};

/// One 12x91 range-azimuth plane. Used for per-pixel temporal statistics
/// (std maps), sigmoid weight maps, and anything else frame-shaped.
struct FrameMap {
  std::array<double, kGridCells> v{};

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * kGridCols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * kGridCols + c]; }

  bool operator==(const FrameMap&) const = default;
};

using StdMap = FrameMap;     // entries are per-pixel temporal standard deviations, >= 0
using WeightMap = FrameMap;  // entries strictly inside (0, 1)

enum class Activity { standing, walking, mixed };

std::string to_string(Activity a);
Activity activity_from_string(const std::string& s);

struct Sample {
  RadarCube cube;
  int label = 0;  // people count, 0..3
  std::string environment;
  Activity activity = Activity::standing;
  std::string id;
};

struct ManifestEntry {
  std::string path;
  int label = 0;
  std::string environment;
  std::string activity;
  std::string split;  // train | val | test
};

/// JSONL dataset manifest: one object per line with keys
/// path, label, environment, activity, split.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  /// Throws if paths collide, labels leave 0..3, or a split tag is unknown.
  void validate() const;

  std::vector<ManifestEntry> split(const std::string& which) const;
};

void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

/// Resolves a manifest-relative cube path against the manifest's directory.
std::string resolve_manifest_path(const std::string& manifest_path, const std::string& entry_path);

// RADC cube file: magic "RADC", version u16=1, reserved u16=0,
// rows u16, cols u16, frames u32 (little-endian), then rows*cols*frames
// f32 payload in cube order. Refuses non-finite values on both ends.
void save_cube(const RadarCube& cube, const std::string& path);
RadarCube load_cube(const std::string& path);

/// Sub-cube of `length` frames starting at `start`. Throws on out-of-range.
RadarCube slice_window(const RadarCube& cube, int start, int length);

}  // namespace radcount

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radcount/core.hpp"

namespace radcount::synth {

enum class LayoutPreset { A_empty, A_chairs, A_desks, A_whiteboard, B_complex };

std::string to_string(LayoutPreset p);
LayoutPreset preset_from_string(const std::string& s);

enum class Motion { stationary, random_walk };

struct PersonSpec {
  double row = 6.0;
  double col = 45.0;
  double blob_radius = 1.6;  // body footprint radius in px (1-2); Gaussian sigma = radius/2
  double amplitude = 1.0;
  double breathing_hz = 0.3;       // must lie in [0.2, 0.5]
  double modulation_depth = 0.3;   // amplitude swing of the breathing term
  double micro_jitter_std = 0.08;  // per-frame positional wobble of a standing body, px
  Motion motion = Motion::stationary;
  double walk_step_std = 0.15;  // cells per frame
};

struct FurnitureSpec {
  double row = 6.0;
  double col = 45.0;
  double radius = 1.5;  // footprint radius in px; Gaussian sigma = radius/2
  double amplitude = 0.8;
};

struct SceneConfig {
  std::vector<PersonSpec> persons;  // at most 3
  std::vector<FurnitureSpec> furniture;
  LayoutPreset layout_preset = LayoutPreset::A_empty;
  double frame_rate = 8.5;  // frames per second
  int frames = 60;
  double noise_std = 0.005;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Renders a scene: static furniture blobs, breathing/walking person blobs
/// (Gaussian profile, borders reflect walkers back inside), and white
/// Gaussian noise. Bit-identical for identical (config, seed).
Sample generate_cube(const SceneConfig& scene);

/// Fills in persons/furniture for a preset: person starts are drawn with a
/// minimum pairwise separation; furniture follows the preset (none /
/// 1-4 random chairs / joined center desks / center whiteboard / 6 fixed
/// items for the complex layout).
SceneConfig make_scene(LayoutPreset preset, int persons, Activity activity, std::uint64_t seed);

struct DatasetOptions {
  LayoutPreset preset = LayoutPreset::A_chairs;
  int per_class = 25;
  std::uint64_t seed = 0;
  int frames = 60;
  std::string out_dir;
};

/// Generates per_class samples for each label 0..3: activities cycle
/// standing/walking/mixed, A presets are split 7:1.5:1.5 by largest
/// remainder over a seeded shuffle, the B preset is test-only. Writes RADC
/// files plus manifest.jsonl and a scene-config echo for provenance.
DatasetManifest generate_dataset(const DatasetOptions& options);

}  // namespace radcount::synth

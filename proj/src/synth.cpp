// SPDX-License-Identifier: Apache-2.0
#include "radcount/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "radcount/rng.hpp"

namespace radcount::synth {

std::string to_string(LayoutPreset p) {
  switch (p) {
    case LayoutPreset::A_empty: return "A_empty";
    case LayoutPreset::A_chairs: return "A_chairs";
    case LayoutPreset::A_desks: return "A_desks";
    case LayoutPreset::A_whiteboard: return "A_whiteboard";
    case LayoutPreset::B_complex: return "B_complex";
  }
  throw std::invalid_argument("unknown layout preset");
}

LayoutPreset preset_from_string(const std::string& s) {
  if (s == "A_empty") return LayoutPreset::A_empty;
  if (s == "A_chairs") return LayoutPreset::A_chairs;
  if (s == "A_desks") return LayoutPreset::A_desks;
  if (s == "A_whiteboard") return LayoutPreset::A_whiteboard;
  if (s == "B_complex") return LayoutPreset::B_complex;
  throw std::invalid_argument("unknown layout preset: " + s);
}

void SceneConfig::validate() const {
  if (persons.size() > 3) throw std::invalid_argument("scene: at most 3 persons");
  if (frames < 2) throw std::invalid_argument("scene: need at least 2 frames");
  if (noise_std < 0.0) throw std::invalid_argument("scene: negative noise std");
  if (!(frame_rate > 0.0)) throw std::invalid_argument("scene: frame rate must be > 0");
  for (const auto& p : persons) {
    if (p.row < 0.0 || p.row > kGridRows - 1 || p.col < 0.0 || p.col > kGridCols - 1)
      throw std::invalid_argument("scene: person outside the 12x91 grid");
    if (p.breathing_hz < 0.2 || p.breathing_hz > 0.5)
      throw std::invalid_argument("scene: breathing frequency outside [0.2, 0.5] Hz");
    if (!(p.blob_radius > 0.0)) throw std::invalid_argument("scene: non-positive blob radius");
  }
  for (const auto& f : furniture)
    if (f.row < 0.0 || f.row > kGridRows - 1 || f.col < 0.0 || f.col > kGridCols - 1)
      throw std::invalid_argument("scene: furniture outside the 12x91 grid");
}

namespace {

/// Adds an isotropic Gaussian blob with sigma = radius/2, truncated at
/// 2 sigma (= radius).
void splat_blob(RadarCube& cube, int frame, double row, double col, double radius,
                double amplitude) {
  const double sigma = radius / 2.0;
  const double cut = radius;
  const int r_lo = std::max(0, static_cast<int>(std::floor(row - cut)));
  const int r_hi = std::min(kGridRows - 1, static_cast<int>(std::ceil(row + cut)));
  const int c_lo = std::max(0, static_cast<int>(std::floor(col - cut)));
  const int c_hi = std::min(kGridCols - 1, static_cast<int>(std::ceil(col + cut)));
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int r = r_lo; r <= r_hi; ++r)
    for (int c = c_lo; c <= c_hi; ++c) {
      const double d2 = (r - row) * (r - row) + (c - col) * (c - col);
      if (d2 > cut * cut) continue;
      cube.at(frame, r, c) += static_cast<float>(amplitude * std::exp(-d2 * inv));
    }
}

/// Reflects a coordinate back into [0, limit].
double reflect(double x, double limit) {
  while (x < 0.0 || x > limit) {
    if (x < 0.0) x = -x;
    if (x > limit) x = 2.0 * limit - x;
  }
  return x;
}

}  // namespace

Sample generate_cube(const SceneConfig& scene) {
  scene.validate();
  RadarCube cube = RadarCube::sensor_sized(scene.frames);

  // Furniture: temporally constant.
  for (const auto& f : scene.furniture)
    for (int t = 0; t < scene.frames; ++t)
      splat_blob(cube, t, f.row, f.col, f.radius, f.amplitude);

  // Persons: stream per person so adding one never disturbs the others.
  for (std::size_t pi = 0; pi < scene.persons.size(); ++pi) {
    const auto& p = scene.persons[pi];
    Rng rng(derive_seed(scene.seed, 0x5045'5253ull + pi));  // person stream
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    double row = p.row, col = p.col;
    for (int t = 0; t < scene.frames; ++t) {
      double draw_row = row, draw_col = col;
      if (p.motion == Motion::random_walk) {
        if (t > 0) {
          row = reflect(row + rng.normal(0.0, p.walk_step_std), kGridRows - 1.0);
          col = reflect(col + rng.normal(0.0, p.walk_step_std), kGridCols - 1.0);
        }
        draw_row = row;
        draw_col = col;
      } else if (p.micro_jitter_std > 0.0) {
        // A standing body is not frozen: it wobbles around its anchor.
        draw_row = reflect(row + rng.normal(0.0, p.micro_jitter_std), kGridRows - 1.0);
        draw_col = reflect(col + rng.normal(0.0, p.micro_jitter_std), kGridCols - 1.0);
      }
      const double breath =
          1.0 + p.modulation_depth *
                    std::sin(2.0 * std::numbers::pi * p.breathing_hz * t / scene.frame_rate + phase);
      splat_blob(cube, t, draw_row, draw_col, p.blob_radius, p.amplitude * breath);
    }
  }

  if (scene.noise_std > 0.0) {
    Rng rng(derive_seed(scene.seed, 0x4E4F'4953ull));  // noise stream
    for (float& x : cube.data) x += static_cast<float>(rng.normal(0.0, scene.noise_std));
  }

  Sample sample;
  sample.cube = std::move(cube);
  sample.label = static_cast<int>(scene.persons.size());
  sample.environment = to_string(scene.layout_preset);
  return sample;
}

namespace {

constexpr double kMinPersonSeparation = 10.0;  // px, keeps dilated blobs apart

std::vector<std::pair<double, double>> draw_person_positions(int count, Rng& rng) {
  std::vector<std::pair<double, double>> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 10000) throw std::runtime_error("synth: cannot place persons apart");
    const double row = rng.uniform(2.5, kGridRows - 3.5);
    const double col = rng.uniform(6.0, kGridCols - 7.0);
    bool ok = true;
    for (const auto& [r, c] : out) {
      const double d = std::hypot(row - r, col - c);
      if (d < kMinPersonSeparation) {
        ok = false;
        break;
      }
    }
    if (ok) out.emplace_back(row, col);
  }
  return out;
}

std::vector<FurnitureSpec> preset_furniture(LayoutPreset preset, Rng& rng) {
  std::vector<FurnitureSpec> out;
  switch (preset) {
    case LayoutPreset::A_empty:
      break;
    case LayoutPreset::A_chairs: {
      const int chairs = rng.range(1, 4);
      for (int i = 0; i < chairs; ++i)
        out.push_back({rng.uniform(2.0, kGridRows - 3.0), rng.uniform(8.0, kGridCols - 9.0), 1.0,
                       0.8});
      break;
    }
    case LayoutPreset::A_desks:
      // Two desks joined at the room center.
      out.push_back({5.5, 41.0, 2.2, 0.9});
      out.push_back({5.5, 50.0, 2.2, 0.9});
      break;
    case LayoutPreset::A_whiteboard:
      out.push_back({5.5, 45.5, 2.4, 1.0});
      break;
    case LayoutPreset::B_complex:
      // Three chairs, two desks, one whiteboard at fixed distinct spots.
      out.push_back({2.5, 14.0, 1.0, 0.8});
      out.push_back({9.0, 27.0, 1.0, 0.8});
      out.push_back({3.0, 77.0, 1.0, 0.8});
      out.push_back({7.5, 55.0, 2.2, 0.9});
      out.push_back({5.0, 66.0, 2.2, 0.9});
      out.push_back({8.5, 38.0, 2.4, 1.0});
      break;
  }
  return out;
}

}  // namespace

SceneConfig make_scene(LayoutPreset preset, int persons, Activity activity, std::uint64_t seed) {
  if (persons < 0 || persons > 3) throw std::invalid_argument("make_scene: persons must be 0..3");
  SceneConfig scene;
  scene.layout_preset = preset;
  scene.seed = seed;
  Rng rng(derive_seed(seed, 0x5343'454Eull));  // scene layout stream

  scene.furniture = preset_furniture(preset, rng);
  const auto positions = draw_person_positions(persons, rng);
  for (int i = 0; i < persons; ++i) {
    PersonSpec p;
    p.row = positions[static_cast<std::size_t>(i)].first;
    p.col = positions[static_cast<std::size_t>(i)].second;
    p.blob_radius = rng.uniform(1.4, 1.9);
    p.amplitude = rng.uniform(1.0, 1.2);
    p.breathing_hz = rng.uniform(0.2, 0.5);
    switch (activity) {
      case Activity::standing: p.motion = Motion::stationary; break;
      case Activity::walking: p.motion = Motion::random_walk; break;
      case Activity::mixed:
        // Alternate; a lone person walks so the tag differs from standing.
        p.motion = (persons == 1 || i % 2 == 1) ? Motion::random_walk : Motion::stationary;
        break;
    }
    scene.persons.push_back(p);
  }
  return scene;
}

namespace {

nlohmann::json scene_json(const SceneConfig& s, const std::string& id, Activity activity) {
  nlohmann::json j;
  j["id"] = id;
  j["layout_preset"] = to_string(s.layout_preset);
  j["activity"] = to_string(activity);
  j["frames"] = s.frames;
  j["frame_rate"] = s.frame_rate;
  j["noise_std"] = s.noise_std;
  j["seed"] = s.seed;
  auto persons = nlohmann::json::array();
  for (const auto& p : s.persons)
    persons.push_back({{"row", p.row},
                       {"col", p.col},
                       {"blob_radius", p.blob_radius},
                       {"amplitude", p.amplitude},
                       {"breathing_hz", p.breathing_hz},
                       {"motion", p.motion == Motion::stationary ? "stationary" : "random_walk"},
                       {"walk_step_std", p.walk_step_std}});
  j["persons"] = persons;
  auto furniture = nlohmann::json::array();
  for (const auto& f : s.furniture)
    furniture.push_back(
        {{"row", f.row}, {"col", f.col}, {"radius", f.radius}, {"amplitude", f.amplitude}});
  j["furniture"] = furniture;
  return j;
}

/// 7 : 1.5 : 1.5 split sizes by largest remainder.
std::array<std::size_t, 3> split_sizes(std::size_t total) {
  const std::array<double, 3> weights = {0.70, 0.15, 0.15};
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = weights[static_cast<std::size_t>(i)] * static_cast<double>(total);
    sizes[static_cast<std::size_t>(i)] = static_cast<std::size_t>(std::floor(exact));
    remainders[static_cast<std::size_t>(i)] = exact - std::floor(exact);
    assigned += sizes[static_cast<std::size_t>(i)];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return remainders[static_cast<std::size_t>(a)] > remainders[static_cast<std::size_t>(b)];
  });
  for (std::size_t leftover = total - assigned, i = 0; i < leftover; ++i)
    ++sizes[static_cast<std::size_t>(order[i % 3])];
  return sizes;
}

}  // namespace

DatasetManifest generate_dataset(const DatasetOptions& options) {
  if (options.per_class < 0) throw std::invalid_argument("generate_dataset: negative per_class");
  if (options.out_dir.empty()) throw std::invalid_argument("generate_dataset: missing out_dir");
  std::filesystem::create_directories(options.out_dir);

  const bool is_b = options.preset == LayoutPreset::B_complex;
  constexpr Activity kCycle[3] = {Activity::standing, Activity::walking, Activity::mixed};

  struct Pending {
    std::string id;
    int label;
    Activity activity;
    SceneConfig scene;
  };
  std::vector<Pending> pending;
  auto scenes_echo = nlohmann::json::array();
  for (int label = 0; label <= 3; ++label) {
    for (int i = 0; i < options.per_class; ++i) {
      Pending p;
      p.label = label;
      p.activity = kCycle[i % 3];
      char id[64];
      std::snprintf(id, sizeof id, "%s_c%d_%03d", to_string(options.preset).c_str(), label, i);
      p.id = id;
      p.scene = make_scene(options.preset, label, p.activity,
                           derive_seed(options.seed, p.id));
      p.scene.frames = options.frames;
      pending.push_back(std::move(p));
      scenes_echo.push_back(scene_json(pending.back().scene, pending.back().id,
                                       pending.back().activity));
    }
  }

  // Split assignment: seeded shuffle, then largest-remainder block sizes.
  std::vector<std::size_t> order(pending.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(derive_seed(options.seed, 0x5350'4C49ull));
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[shuffle_rng.below(i)]);
  std::vector<std::string> split_of(pending.size(), "test");
  if (!is_b && !pending.empty()) {
    const auto sizes = split_sizes(pending.size());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < sizes[0]; ++i) split_of[order[pos++]] = "train";
    for (std::size_t i = 0; i < sizes[1]; ++i) split_of[order[pos++]] = "val";
    for (std::size_t i = 0; i < sizes[2]; ++i) split_of[order[pos++]] = "test";
  }

  DatasetManifest manifest;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto& p = pending[i];
    const Sample sample = generate_cube(p.scene);
    const std::string filename = p.id + ".radc";
    save_cube(sample.cube, (std::filesystem::path(options.out_dir) / filename).string());
    manifest.entries.push_back(
        {filename, p.label, to_string(options.preset), to_string(p.activity), split_of[i]});
  }
  manifest.validate();
  save_manifest(manifest,
                (std::filesystem::path(options.out_dir) / "manifest.jsonl").string());

  std::ofstream echo((std::filesystem::path(options.out_dir) / "scenes.json").string(),
                     std::ios::binary);
  if (!echo) throw std::runtime_error("cannot write scene echo");
  nlohmann::json top;
  top["preset"] = to_string(options.preset);
  top["per_class"] = options.per_class;
  top["seed"] = options.seed;
  top["scenes"] = scenes_echo;
  echo << top.dump(2) << "\n";
  return manifest;
}

}  // namespace radcount::synth

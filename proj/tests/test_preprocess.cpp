// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "radcount/preprocess.hpp"
#include "radcount/rng.hpp"

using namespace radcount;
using namespace radcount::preprocess;

namespace {

RadarCube random_cube(int frames, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  RadarCube cube = RadarCube::sensor_sized(frames);
  Rng rng(seed);
  for (float& x : cube.data) x = static_cast<float>(rng.uniform(lo, hi));
  return cube;
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("clip: constant cube unchanged") {
  RadarCube cube = RadarCube::sensor_sized(2);
  std::fill(cube.data.begin(), cube.data.end(), 5.0f);
  CHECK(clip_percentiles(cube) == cube);
}

TEST_CASE("clip: 1..1000 against the sort-and-interpolate oracle") {
  RadarCube cube(1, 1000, 1);
  for (int c = 0; c < 1000; ++c) cube.at(0, 0, c) = static_cast<float>(c + 1);
  std::vector<double> values(cube.data.begin(), cube.data.end());
  const double lo = oracles::percentile(values, 0.1);
  const double hi = oracles::percentile(values, 99.9);
  const RadarCube clipped = clip_percentiles(cube, 0.1, 99.9);
  for (std::size_t i = 0; i < clipped.data.size(); ++i) {
    const double expected = std::clamp(static_cast<double>(cube.data[i]), lo, hi);
    CHECK(clipped.data[i] == doctest::Approx(expected).epsilon(1e-6));
  }
  // Middle values untouched.
  CHECK(clipped.at(0, 0, 500) == cube.at(0, 0, 500));
  CHECK(clipped.at(0, 0, 0) > cube.at(0, 0, 0));
  CHECK(clipped.at(0, 0, 999) < cube.at(0, 0, 999));
}

TEST_CASE("clip: lone spike clamped to the high percentile") {
  RadarCube cube = random_cube(2, 11, 0.0, 1.0);
  cube.at(0, 5, 40) = 1e9f;
  std::vector<double> values(cube.data.begin(), cube.data.end());
  const double hi = oracles::percentile(values, 99.9);
  const RadarCube clipped = clip_percentiles(cube);
  CHECK(clipped.at(0, 5, 40) == doctest::Approx(hi).epsilon(1e-6));
  const float max_after = *std::max_element(clipped.data.begin(), clipped.data.end());
  CHECK(max_after <= doctest::Approx(hi).epsilon(1e-6));
}

TEST_CASE("clip: exact idempotence at integral percentile ranks") {
  // 101 values put the 10th/90th percentile ranks exactly on order
  // statistics, where a second clip reproduces the first bit-for-bit.
  RadarCube cube(1, 101, 1);
  Rng rng(3);
  for (float& x : cube.data) x = static_cast<float>(rng.uniform(-50.0, 50.0));
  const RadarCube once = clip_percentiles(cube, 10.0, 90.0);
  const RadarCube twice = clip_percentiles(once, 10.0, 90.0);
  CHECK(twice == once);
}

TEST_CASE("clip: fractional ranks drift at most by the band-edge gap") {
  // With interpolated percentiles a reclip may nudge values that sit exactly
  // on the band edge, but never past the reclipped band.
  const RadarCube cube = random_cube(60, 17);
  const RadarCube once = clip_percentiles(cube);
  const RadarCube twice = clip_percentiles(once);
  const auto [lo1, hi1] = percentile_band(cube, 0.1, 99.9);
  const auto [lo2, hi2] = percentile_band(once, 0.1, 99.9);
  CHECK(lo2 >= lo1);
  CHECK(hi2 <= hi1);
  for (std::size_t i = 0; i < once.data.size(); ++i) {
    const double moved = std::abs(static_cast<double>(twice.data[i]) - once.data[i]);
    CHECK(moved <= std::max(lo2 - lo1, hi1 - hi2) + 1e-6);
  }
}

TEST_CASE("minmax: affine map and degenerate rule") {
  RadarCube cube(1, 3, 1);
  cube.at(0, 0, 0) = 2.0f;
  cube.at(0, 0, 1) = 4.0f;
  cube.at(0, 0, 2) = 6.0f;
  const RadarCube norm = minmax_normalize(cube);
  CHECK(norm.at(0, 0, 0) == 0.0f);
  CHECK(norm.at(0, 0, 1) == 0.5f);
  CHECK(norm.at(0, 0, 2) == 1.0f);

  RadarCube constant = RadarCube::sensor_sized(2);
  std::fill(constant.data.begin(), constant.data.end(), 7.5f);
  const RadarCube zeros = minmax_normalize(constant);
  CHECK(*std::max_element(zeros.data.begin(), zeros.data.end()) == 0.0f);
}

TEST_CASE("minmax: bounds and order preservation on random cubes") {
  const RadarCube cube = random_cube(10, 23, -40.0, 90.0);
  const RadarCube norm = minmax_normalize(cube);
  CHECK(*std::min_element(norm.data.begin(), norm.data.end()) == 0.0f);
  CHECK(*std::max_element(norm.data.begin(), norm.data.end()) == 1.0f);
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto i = static_cast<std::size_t>(rng.below(norm.data.size()));
    const auto j = static_cast<std::size_t>(rng.below(norm.data.size()));
    if (cube.data[i] < cube.data[j]) CHECK(norm.data[i] <= norm.data[j]);
  }
}

TEST_CASE("temporal std: constant, alternating, and oracle comparison") {
  RadarCube constant = RadarCube::sensor_sized(5);
  std::fill(constant.data.begin(), constant.data.end(), 3.0f);
  const StdMap zero = temporal_std_map(constant);
  for (double v : zero.v) CHECK(v == 0.0);

  RadarCube alternating = RadarCube::sensor_sized(60);
  for (int f = 0; f < 60; ++f) alternating.at(f, 4, 17) = static_cast<float>(f % 2);
  CHECK(temporal_std_map(alternating).at(4, 17) == doctest::Approx(0.5).epsilon(1e-12));

  const RadarCube cube = random_cube(60, 31);
  const StdMap sigma = temporal_std_map(cube);
  for (int r = 0; r < kGridRows; r += 3)
    for (int c = 0; c < kGridCols; c += 13) {
      std::vector<double> series;
      for (int f = 0; f < cube.frames; ++f) series.push_back(cube.at(f, r, c));
      CHECK(sigma.at(r, c) ==
            doctest::Approx(oracles::population_std(series)).epsilon(1e-6));
    }

  RadarCube single = RadarCube::sensor_sized(2);
  single.frames = 1;
  single.data.resize(kGridCells);
  CHECK_THROWS(temporal_std_map(single));
}

TEST_CASE("sigmoid weights: center, one-sigma point, asymptotes") {
  StdMap sigma;
  sigma.at(0, 0) = 0.2;   // == tau_w
  sigma.at(0, 1) = 0.25;  // tau_w + s
  sigma.at(0, 2) = 1e9;
  sigma.at(0, 3) = 0.0;
  const ResolvedSigmoid cfg{0.2, 0.05};
  const WeightMap w = sigmoid_weight_map(sigma, cfg);
  CHECK(w.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w.at(0, 1) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  CHECK(w.at(0, 2) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w.at(0, 3) < 0.02);  // tau_w >> s pushes sigma=0 toward 0
}

TEST_CASE("sigmoid weights: strictly monotone in sigma") {
  const ResolvedSigmoid cfg{0.1, 0.03};
  StdMap sigma;
  for (int c = 0; c < kGridCols; ++c) sigma.at(0, c) = 0.002 * c;
  const WeightMap w = sigmoid_weight_map(sigma, cfg);
  for (int c = 1; c < kGridCols; ++c) CHECK(w.at(0, c) > w.at(0, c - 1));
}

TEST_CASE("apply_weights: identity, halving, elementwise oracle") {
  const RadarCube cube = random_cube(4, 41);
  WeightMap ones;
  ones.v.fill(1.0);
  CHECK(apply_weights(cube, ones) == cube);

  WeightMap halves;
  halves.v.fill(0.5);
  const RadarCube halved = apply_weights(cube, halves);
  for (std::size_t i = 0; i < cube.data.size(); ++i)
    CHECK(halved.data[i] == doctest::Approx(cube.data[i] * 0.5f));

  WeightMap arbitrary;
  Rng rng(9);
  for (double& x : arbitrary.v) x = rng.u01();
  const RadarCube weighted = apply_weights(cube, arbitrary);
  for (int f = 0; f < cube.frames; ++f)
    for (int r = 0; r < kGridRows; ++r)
      for (int c = 0; c < kGridCols; ++c)
        CHECK(weighted.at(f, r, c) ==
              doctest::Approx(static_cast<float>(cube.at(f, r, c) * arbitrary.at(r, c))));
}

TEST_CASE("pipeline config parses JSON with auto and explicit sigmoid fields") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "pre_cfg.json").string();

  std::ofstream(path) << R"({"lo_pct": 1.5, "hi_pct": 98.5, "sigmoid": {"tau_w": "auto", "s": 0.02}})";
  const PipelineConfig cfg = PipelineConfig::from_json_file(path);
  CHECK(cfg.lo_pct == 1.5);
  CHECK(cfg.hi_pct == 98.5);
  CHECK_FALSE(cfg.sigmoid.tau_w.has_value());
  REQUIRE(cfg.sigmoid.s.has_value());
  CHECK(*cfg.sigmoid.s == 0.02);

  std::ofstream(path) << R"({})";
  const PipelineConfig defaults = PipelineConfig::from_json_file(path);
  CHECK(defaults.lo_pct == 0.1);
  CHECK(defaults.hi_pct == 99.9);

  std::ofstream(path) << R"({"lo_pct": 50, "hi_pct": 10})";
  CHECK_THROWS(PipelineConfig::from_json_file(path));
  std::ofstream(path) << R"({"sigmoid": {"s": -1.0}})";
  CHECK_THROWS(PipelineConfig::from_json_file(path));
  std::filesystem::remove(path);
}

TEST_CASE("pipeline equals its stages composed, lands in [0,1), deterministic") {
  const RadarCube cube = random_cube(60, 57, 0.0, 12.0);
  const PipelineConfig cfg;

  const RadarCube staged = [&] {
    const RadarCube clipped = clip_percentiles(cube, cfg.lo_pct, cfg.hi_pct);
    const RadarCube normalized = minmax_normalize(clipped);
    const StdMap sigma = temporal_std_map(normalized);
    const ResolvedSigmoid rs = resolve_sigmoid(sigma, cfg.sigmoid);
    return apply_weights(normalized, sigmoid_weight_map(sigma, rs));
  }();
  const RadarCube piped = preprocess_pipeline(cube, cfg);
  CHECK(piped == staged);
  for (float x : piped.data) {
    CHECK(x >= 0.0f);
    CHECK(x < 1.0f);
  }
  CHECK(preprocess_pipeline(cube, cfg) == piped);  // bitwise repeatable
}

}  // TEST_SUITE

// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "radcount/preprocess.hpp"
#include "radcount/rng.hpp"
#include "radcount/rulecc.hpp"

using namespace radcount;
using namespace radcount::rulecc;

namespace {

BinaryMask random_mask(std::uint64_t seed, double density = 0.35) {
  BinaryMask m;
  Rng rng(seed);
  for (auto& b : m.v) b = rng.u01() < density ? 1 : 0;
  return m;
}

BinaryMask rectangle(int r0, int c0, int height, int width) {
  BinaryMask m;
  for (int r = r0; r < r0 + height; ++r)
    for (int c = c0; c < c0 + width; ++c) m.at(r, c) = 1;
  return m;
}

/// Adds a fluctuating blob: amplitude alternates a +/- delta around base in
/// a plus-shaped neighborhood of (row, col) with the given radius.
void add_fluctuating_blob(RadarCube& cube, int row, int col, int radius, double base,
                          double delta) {
  for (int f = 0; f < cube.frames; ++f) {
    const double amp = base + ((f % 2 == 0) ? delta : -delta);
    for (int dr = -radius; dr <= radius; ++dr)
      for (int dc = -radius; dc <= radius; ++dc) {
        if (std::abs(dr) + std::abs(dc) > radius) continue;
        const int r = row + dr, c = col + dc;
        if (r < 0 || r >= kGridRows || c < 0 || c >= kGridCols) continue;
        cube.at(f, r, c) += static_cast<float>(amp);
      }
  }
}

}  // namespace

TEST_SUITE("rulecc") {

TEST_CASE("gaussian smoothing: zeros, constants, impulse, oracle") {
  StdMap zeros;
  const StdMap smoothed_zeros = gaussian_smooth(zeros, 0.8);
  for (double v : smoothed_zeros.v) CHECK(v == 0.0);

  StdMap constant;
  constant.v.fill(2.0);
  const StdMap smoothed_const = gaussian_smooth(constant, 0.8);
  CHECK(smoothed_const.at(6, 45) == doctest::Approx(2.0).epsilon(1e-9));  // interior preserved
  CHECK(smoothed_const.at(0, 0) < 2.0);                                   // zero padding at borders

  StdMap impulse;
  impulse.at(6, 45) = 1.0;
  const StdMap response = gaussian_smooth(impulse, 0.8);
  const StdMap expected = oracles::gaussian_convolve(impulse, 0.8);
  CHECK(response.at(6, 45) == doctest::Approx(expected.at(6, 45)).epsilon(1e-12));
  // Peak equals the kernel center weight.
  double norm = 0.0;
  for (int dy = -3; dy <= 3; ++dy)
    for (int dx = -3; dx <= 3; ++dx) norm += std::exp(-(dx * dx + dy * dy) / (2.0 * 0.64));
  CHECK(response.at(6, 45) == doctest::Approx(1.0 / norm).epsilon(1e-9));

  StdMap noisy;
  Rng rng(77);
  for (double& v : noisy.v) v = rng.u01();
  const StdMap a = gaussian_smooth(noisy, 0.8);
  const StdMap b = oracles::gaussian_convolve(noisy, 0.8);
  for (int i = 0; i < kGridCells; ++i)
    CHECK(a.v[static_cast<std::size_t>(i)] ==
          doctest::Approx(b.v[static_cast<std::size_t>(i)]).epsilon(1e-9));
}

TEST_CASE("binarize is a strict comparison, elementwise") {
  StdMap map;
  Rng rng(5);
  for (double& v : map.v) v = rng.u01();
  CHECK(binarize(map, -0.1).count_ones() == kGridCells);
  CHECK(binarize(map, 1.1).count_ones() == 0);
  const double threshold = 0.5;
  const BinaryMask m = binarize(map, threshold);
  for (int i = 0; i < kGridCells; ++i)
    CHECK(m.v[static_cast<std::size_t>(i)] ==
          (map.v[static_cast<std::size_t>(i)] > threshold ? 1 : 0));
  map.at(3, 3) = threshold;  // boundary value stays off
  CHECK(binarize(map, threshold).at(3, 3) == 0);
}

TEST_CASE("erosion of the 4-wide x 3-tall rectangle keeps exactly the 2 center pixels") {
  const BinaryMask rect = rectangle(4, 30, 3, 4);
  const BinaryMask eroded = erode4(rect, 1);
  CHECK(eroded.count_ones() == 2);
  CHECK(eroded.at(5, 31) == 1);
  CHECK(eroded.at(5, 32) == 1);
}

TEST_CASE("erosion of all-ones removes exactly the border") {
  BinaryMask ones;
  ones.v.fill(1);
  const BinaryMask eroded = erode4(ones, 1);
  for (int r = 0; r < kGridRows; ++r)
    for (int c = 0; c < kGridCols; ++c) {
      const bool border = r == 0 || r == kGridRows - 1 || c == 0 || c == kGridCols - 1;
      CHECK(eroded.at(r, c) == (border ? 0 : 1));
    }
}

TEST_CASE("dilation of a point: plus after 1 iteration, 13-pixel diamond after 2") {
  BinaryMask point;
  point.at(6, 45) = 1;
  const BinaryMask plus = dilate4(point, 1);
  CHECK(plus.count_ones() == 5);
  CHECK(plus.at(6, 45) == 1);
  CHECK(plus.at(5, 45) == 1);
  CHECK(plus.at(7, 45) == 1);
  CHECK(plus.at(6, 44) == 1);
  CHECK(plus.at(6, 46) == 1);

  const BinaryMask diamond = dilate4(point, 2);
  CHECK(diamond.count_ones() == 13);
  for (int r = 0; r < kGridRows; ++r)
    for (int c = 0; c < kGridCols; ++c)
      CHECK(diamond.at(r, c) == ((std::abs(r - 6) + std::abs(c - 45) <= 2) ? 1 : 0));
}

TEST_CASE("opening restores the eroded rectangle's neighborhood") {
  const BinaryMask rect = rectangle(4, 30, 3, 4);
  const BinaryMask opened = dilate4(erode4(rect, 1), 2);
  // Superset of the survivors' L1 balls; one reconnected component.
  for (int r = 0; r < kGridRows; ++r)
    for (int c = 0; c < kGridCols; ++c)
      if (std::abs(r - 5) + std::abs(c - 31) <= 2 || std::abs(r - 5) + std::abs(c - 32) <= 2)
        CHECK(opened.at(r, c) == 1);
  CHECK(label_components_4(opened).size() == 1);
}

TEST_CASE("morphology matches the set-based oracles on random masks") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const BinaryMask m = random_mask(seed, 0.2 + 0.012 * static_cast<double>(seed));
    CHECK(erode4(m, 1) == oracles::set_to_mask(oracles::erode_once(oracles::mask_to_set(m))));
    CHECK(dilate4(m, 1) == oracles::set_to_mask(oracles::dilate_once(oracles::mask_to_set(m))));
    CHECK(erode4(m, 2) ==
          oracles::set_to_mask(oracles::erode_once(oracles::erode_once(oracles::mask_to_set(m)))));
    CHECK(dilate4(m, 0) == m);
    CHECK(erode4(m, 0) == m);
  }
}

TEST_CASE("anti-extensivity / extensivity: eroded <= mask <= dilated") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const BinaryMask m = random_mask(seed);
    const BinaryMask e = erode4(m, 1);
    const BinaryMask d = dilate4(m, 1);
    for (int i = 0; i < kGridCells; ++i) {
      CHECK(e.v[static_cast<std::size_t>(i)] <= m.v[static_cast<std::size_t>(i)]);
      CHECK(m.v[static_cast<std::size_t>(i)] <= d.v[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("labeling: empty mask, diagonal pixels, flood-fill oracle") {
  BinaryMask empty;
  CHECK(label_components_4(empty).empty());

  BinaryMask diagonal;
  diagonal.at(3, 3) = 1;
  diagonal.at(4, 4) = 1;
  CHECK(label_components_4(diagonal).size() == 2);  // diagonals do not connect

  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const BinaryMask m = random_mask(seed, 0.15 + 0.0007 * static_cast<double>(seed));
    const ComponentSet got = label_components_4(m);
    auto expected = oracles::flood_fill_components(m);
    REQUIRE(got.size() == expected.size());

    // Same memberships: compare as sets of pixel sets.
    std::set<std::set<int>> got_sets, expected_sets;
    int total_pixels = 0;
    for (const auto& comp : got) {
      got_sets.insert(std::set<int>(comp.pixels.begin(), comp.pixels.end()));
      total_pixels += comp.area;
    }
    for (const auto& comp : expected) {
      std::set<int> s;
      for (const auto& [r, c] : comp) s.insert(r * kGridCols + c);
      expected_sets.insert(std::move(s));
    }
    CHECK(got_sets == expected_sets);
    CHECK(total_pixels == m.count_ones());  // partition property
  }
}

TEST_CASE("component metrics: pixel, square, line") {
  const Component single = component_metrics({0});
  CHECK(single.area == 1);
  CHECK(single.perimeter == 4);
  CHECK(single.compactness == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-12));

  // 2x2 square at (2,2).
  const Component square =
      component_metrics({2 * kGridCols + 2, 2 * kGridCols + 3, 3 * kGridCols + 2, 3 * kGridCols + 3});
  CHECK(square.area == 4);
  CHECK(square.perimeter == 8);
  CHECK(square.compactness == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-12));

  // 1x5 horizontal line.
  std::vector<int> line;
  for (int c = 10; c < 15; ++c) line.push_back(5 * kGridCols + c);
  const Component strip = component_metrics(line);
  CHECK(strip.area == 5);
  CHECK(strip.perimeter == 12);
  CHECK(strip.compactness == doctest::Approx(20.0 * std::numbers::pi / 144.0).epsilon(1e-12));
}

TEST_CASE("component validation: area and compactness gates") {
  RuleCCConfig cfg;
  ComponentSet cs;
  cs.push_back(component_metrics({0}));  // area 1 < 2: rejected
  std::vector<int> blob;                 // 6x10 = 60 px > 50: rejected
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 10; ++c) blob.push_back(r * kGridCols + c);
  cs.push_back(component_metrics(blob));
  std::vector<int> square9;  // 3x3: kept
  for (int r = 4; r < 7; ++r)
    for (int c = 40; c < 43; ++c) square9.push_back(r * kGridCols + c);
  cs.push_back(component_metrics(square9));
  const ComponentSet kept = valid_components(cs, cfg);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].area == 9);
  CHECK(kept[0].perimeter == 12);
  CHECK(kept[0].compactness == doctest::Approx(std::numbers::pi / 4.0));

  // An elongated snake with low compactness is rejected even at legal area.
  std::vector<int> snake;
  for (int c = 0; c < 20; ++c) snake.push_back(8 * kGridCols + c);
  const Component s = component_metrics(snake);
  CHECK(s.compactness < 0.17);
  RuleCCConfig strict = cfg;
  strict.compactness_min = 0.2;
  CHECK(valid_components({s}, strict).empty());
}

TEST_CASE("count_window: static window yields 0") {
  RadarCube still = RadarCube::sensor_sized(20);
  std::fill(still.data.begin(), still.data.end(), 0.4f);
  CHECK(count_window(still, RuleCCConfig{}) == 0);
}

TEST_CASE("count_window: one and two fluctuating blobs") {
  RuleCCConfig cfg;
  RadarCube one = RadarCube::sensor_sized(20);
  add_fluctuating_blob(one, 6, 20, 2, 0.5, 0.2);  // 13-px plus, std 0.2
  CHECK(count_window(one, cfg) == 1);

  RadarCube two = one;
  add_fluctuating_blob(two, 6, 70, 2, 0.5, 0.2);
  CHECK(count_window(two, cfg) == 2);
}

TEST_CASE("count_window is monotone under adding a disjoint valid blob") {
  RuleCCConfig cfg;
  RadarCube cube = RadarCube::sensor_sized(16);
  int last = count_window(cube, cfg);
  const int cols[3] = {15, 45, 75};
  for (int i = 0; i < 3; ++i) {
    add_fluctuating_blob(cube, 6, cols[i], 2, 0.5, 0.2);
    const int now = count_window(cube, cfg);
    CHECK(now >= last);
    last = now;
  }
  CHECK(last == 3);
}

TEST_CASE("threshold homogeneity: scaling std map and tau together is invariant") {
  StdMap map;
  Rng rng(13);
  for (double& v : map.v) v = rng.u01() * 0.1;
  const double tau = 0.05;
  for (double scale : {0.5, 2.0, 10.0}) {
    StdMap scaled;
    for (int i = 0; i < kGridCells; ++i)
      scaled.v[static_cast<std::size_t>(i)] = map.v[static_cast<std::size_t>(i)] * scale;
    CHECK(binarize(scaled, tau * scale) == binarize(map, tau));
  }
}

TEST_CASE("predict_sequence: unanimous zeros stay zero") {
  RadarCube still = RadarCube::sensor_sized(60);
  std::fill(still.data.begin(), still.data.end(), 0.25f);
  CHECK(predict_sequence(still, RuleCCConfig{}) == 0);
}

TEST_CASE("temporal integration vote: boundary and tie rules") {
  // Exactly 30% non-zero does not exceed the strict bar; overall mode wins.
  CHECK(integrate_window_counts({0, 0, 0, 0, 0, 0, 0, 2, 2, 2}, 0.30) == 0);
  // One more non-zero window tips it over; the non-zero mode wins.
  CHECK(integrate_window_counts({0, 0, 0, 0, 0, 0, 2, 2, 2, 2}, 0.30) == 2);
  // Dense non-zero pool; mode over the non-zero counts.
  CHECK(integrate_window_counts({0, 1, 2, 2, 1, 1, 2, 2}, 0.30) == 2);
  // Frequency ties resolve toward the larger count, in both branches.
  CHECK(integrate_window_counts({1, 1, 2, 2}, 0.30) == 2);
  CHECK(integrate_window_counts({0, 0, 0, 0, 0, 0, 0, 1, 0, 3}, 0.30) == 0);
  CHECK(integrate_window_counts({0, 0, 1, 3}, 0.90) == 0);  // all-mode branch, 0 wins by frequency
  CHECK(integrate_window_counts({0, 0, 1, 1}, 0.90) == 1);  // all-mode tie 0 vs 1 -> larger
  // Unanimity.
  CHECK(integrate_window_counts({0, 0, 0}, 0.30) == 0);
  CHECK(integrate_window_counts({3, 3, 3}, 0.30) == 3);
}

TEST_CASE("temporal integration is independent of pool order") {
  Rng rng(91);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> counts(static_cast<std::size_t>(rng.range(1, 40)));
    for (int& c : counts) c = rng.range(0, 4);
    const int expected = integrate_window_counts(counts, 0.30);
    for (int shuffle = 0; shuffle < 3; ++shuffle) {
      for (std::size_t i = counts.size(); i > 1; --i)
        std::swap(counts[i - 1], counts[static_cast<std::size_t>(rng.below(i))]);
      CHECK(integrate_window_counts(counts, 0.30) == expected);
    }
  }
}

TEST_CASE("predict_sequence errors when the cube is shorter than every window") {
  RuleCCConfig cfg;
  cfg.window_sizes = {30, 60};
  RadarCube tiny = RadarCube::sensor_sized(8);
  CHECK_THROWS(predict_sequence(tiny, cfg));
}

TEST_CASE("rule config parses JSON and rejects bad parameter combinations") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "rule_cfg.json").string();
  std::ofstream(path) << R"({"tau": 0.04, "window_sizes": [20], "area_max": 60})";
  const RuleCCConfig cfg = RuleCCConfig::from_json_file(path);
  CHECK(cfg.tau == 0.04);
  CHECK(cfg.window_sizes == std::vector<int>{20});
  CHECK(cfg.area_max == 60);
  CHECK(cfg.area_min == 2);  // untouched defaults survive

  std::ofstream(path) << R"({"tau": -0.1})";
  CHECK_THROWS(RuleCCConfig::from_json_file(path));
  std::ofstream(path) << R"({"threshold_factors": [0.6, 0.8]})";  // not descending
  CHECK_THROWS(RuleCCConfig::from_json_file(path));
  std::ofstream(path) << R"({"nonzero_ratio": 1.5})";
  CHECK_THROWS(RuleCCConfig::from_json_file(path));
  std::filesystem::remove(path);
}

TEST_CASE("window sizes larger than the cube are skipped, not errors") {
  RuleCCConfig cfg;  // includes W=60
  RadarCube cube = RadarCube::sensor_sized(20);
  add_fluctuating_blob(cube, 6, 45, 2, 0.5, 0.2);
  const SequencePrediction sp = predict_sequence_explained(cube, cfg);
  for (const auto& w : sp.windows) CHECK(w.window_size <= 20);
  CHECK(sp.count == 1);
}

}  // TEST_SUITE

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "radcount/core.hpp"

namespace radcount::rulecc {

/// Rule-based connected-component counter parameters. Defaults are the
/// tuned operating point: primary threshold 0.025, three-stage thresholds
/// (tau, 0.8 tau, 0.6 tau), opening via one erosion and two dilations,
/// component area in [2, 50] px with compactness >= 0.1, window ensemble
/// {10,15,20,25,30,60} frames with the 30% non-zero vote rule.
struct RuleCCConfig {
  double tau = 0.025;
  std::vector<double> threshold_factors = {1.0, 0.8, 0.6};
  double gaussian_sigma = 0.8;
  int erosion_iters = 1;
  int dilation_iters = 2;
  int area_min = 2;
  int area_max = 50;
  double compactness_min = 0.1;
  std::vector<int> window_sizes = {10, 15, 20, 25, 30, 60};
  double nonzero_ratio = 0.30;

  void validate() const;

  static RuleCCConfig from_json_file(const std::string& path);
  std::string to_json() const;
};

/// 12x91 grid of {0,1}.
struct BinaryMask {
  std::array<std::uint8_t, kGridCells> v{};

  std::uint8_t& at(int r, int c) { return v[static_cast<std::size_t>(r) * kGridCols + c]; }
  std::uint8_t at(int r, int c) const { return v[static_cast<std::size_t>(r) * kGridCols + c]; }
  int count_ones() const;

  bool operator==(const BinaryMask&) const = default;
};

/// One 4-connected region: pixels as linear indices (row * 91 + col) in
/// row-major discovery order, with its shape statistics.
struct Component {
  std::vector<int> pixels;
  int area = 0;
  int perimeter = 0;
  double compactness = 0.0;
};

using ComponentSet = std::vector<Component>;

struct WindowPrediction {
  int window_start = 0;
  int window_size = 0;
  std::vector<int> per_threshold_counts;
  int count = 0;
};

/// 2-D Gaussian blur, kernel truncated at radius ceil(3*sigma), normalized
/// to unit sum, zero padding outside the grid.
StdMap gaussian_smooth(const StdMap& map, double sigma = 0.8);

/// mask = 1 where map value is strictly greater than threshold.
BinaryMask binarize(const StdMap& map, double threshold);

/// Keeps a pixel iff it and all four edge-neighbors are 1; off-grid
/// neighbors count as 0.
BinaryMask erode4(const BinaryMask& mask, int iterations = 1);

/// Sets a pixel iff it or any edge-neighbor is 1.
BinaryMask dilate4(const BinaryMask& mask, int iterations = 2);

/// Maximal 4-connected components of the 1-pixels, discovered row-major.
/// Metrics: area = |pixels|, perimeter = exposed edge count,
/// compactness = 4*pi*area / perimeter^2.
ComponentSet label_components_4(const BinaryMask& mask);

Component component_metrics(std::vector<int> pixels);

/// Components passing area_min <= area <= area_max and
/// compactness >= compactness_min.
ComponentSet valid_components(const ComponentSet& cs, const RuleCCConfig& cfg);

/// People count for one window: per threshold level tau_k = factor * tau the
/// std map is smoothed, binarized, opened (erode then dilate), labeled and
/// validated; the maximum valid-component count over the levels wins.
int count_window(const RadarCube& window, const RuleCCConfig& cfg);

/// The temporal-integration vote: if the fraction of non-zero counts
/// strictly exceeds nonzero_ratio the mode of the non-zero counts wins,
/// otherwise the mode of all counts; frequency ties resolve to the larger
/// count.
int integrate_window_counts(const std::vector<int>& counts, double nonzero_ratio);

/// Full sequence prediction: slides every configured window size with step
/// max(1, floor(W/4)), pools all window counts, and applies
/// integrate_window_counts.
int predict_sequence(const RadarCube& cube, const RuleCCConfig& cfg);

/// predict_sequence with the per-window audit trail.
struct SequencePrediction {
  int count = 0;
  std::vector<WindowPrediction> windows;
};
SequencePrediction predict_sequence_explained(const RadarCube& cube, const RuleCCConfig& cfg);

}  // namespace radcount::rulecc

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "radcount/core.hpp"
#include "radcount/metrics.hpp"
#include "radcount/rulecc.hpp"

namespace radcount::tuner {

/// Grid axes: 6 window sizes x 50 linearly spaced primary thresholds
/// (endpoints included) = 300 cells.
struct GridSpec {
  std::vector<int> window_sizes = {10, 15, 20, 25, 30, 60};
  double tau_lo = 0.005;
  double tau_hi = 0.08;
  int tau_points = 50;
};

struct GridCell {
  int window_size = 0;
  double tau = 0.0;
  metrics::EvalReport report;
  int evaluated_samples = 0;
  int skipped_samples = 0;  // cubes shorter than the window
};

struct TuneResult {
  rulecc::RuleCCConfig best_config;
  double best_score = 0.0;
  std::vector<GridCell> table;
  int best_index = -1;
};

/// Linearly spaced thresholds with both endpoints pinned exactly.
std::vector<double> tau_grid(const GridSpec& spec);

struct LabeledCube {
  RadarCube cube;
  int label = 0;
};

/// Scores every (W, tau) cell by the composite metric over the dataset.
/// Each cell runs the counter with that single window size. Tie-break:
/// higher score, then smaller W, then smaller tau. Cubes shorter than a
/// cell's window are skipped and counted in the cell.
TuneResult tune(const std::vector<LabeledCube>& dataset, const GridSpec& spec,
                const rulecc::RuleCCConfig& base_config = {},
                const metrics::CompositeWeights& weights = {}, int threads = 1);

void save_tune_json(const TuneResult& result, const std::string& path);
void save_tune_csv(const TuneResult& result, const std::string& path);

}  // namespace radcount::tuner

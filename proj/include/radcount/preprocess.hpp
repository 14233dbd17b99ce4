// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "radcount/core.hpp"

namespace radcount::preprocess {

/// Parameters of the sigmoid weight map w = 1 / (1 + exp(-(sigma - tau_w)/s)).
/// tau_w centers the sigmoid (w = 0.5 at sigma == tau_w), s sets its width;
/// both are in std-units. Unset fields are derived from the std map itself
/// (tau_w = mean of entries, s = std of entries floored at 1e-6).
struct SigmoidWeightConfig {
  std::optional<double> tau_w;
  std::optional<double> s;
};

struct PipelineConfig {
  double lo_pct = 0.1;
  double hi_pct = 99.9;
  SigmoidWeightConfig sigmoid;

  static PipelineConfig from_json_file(const std::string& path);
  std::string to_json() const;
};

/// Clamps every value into [p_lo, p_hi] of the cube's own value distribution
/// (linear-interpolation percentiles). Values already inside are untouched.
RadarCube clip_percentiles(const RadarCube& cube, double lo_pct = 0.1, double hi_pct = 99.9);

/// Same clamp against an externally supplied band (dataset-global study mode).
RadarCube clip_to_band(const RadarCube& cube, double lo_value, double hi_value);

/// Computes the [lo_pct, hi_pct] percentile band of a cube's values.
std::pair<double, double> percentile_band(const RadarCube& cube, double lo_pct, double hi_pct);

/// Affine map onto [0, 1]; a constant cube maps to all zeros.
RadarCube minmax_normalize(const RadarCube& cube);

/// Per-pixel population standard deviation along the frame axis.
/// Requires a 12x91 cube with at least 2 frames.
StdMap temporal_std_map(const RadarCube& cube);

/// Resolves "auto" sigmoid parameters against a concrete std map.
struct ResolvedSigmoid {
  double tau_w;
  double s;
};
ResolvedSigmoid resolve_sigmoid(const StdMap& std_map, const SigmoidWeightConfig& cfg);

WeightMap sigmoid_weight_map(const StdMap& std_map, const ResolvedSigmoid& cfg);

/// out[f][x][y] = cube[f][x][y] * w[x][y]
RadarCube apply_weights(const RadarCube& cube, const WeightMap& w);

/// clip -> minmax normalize -> temporal std -> sigmoid weights -> apply.
RadarCube preprocess_pipeline(const RadarCube& cube, const PipelineConfig& cfg);

/// Pipeline stopped after normalization (no sigmoid weighting); the
/// alternative std source for the rule-based counter.
RadarCube clip_and_normalize(const RadarCube& cube, const PipelineConfig& cfg);

}  // namespace radcount::preprocess

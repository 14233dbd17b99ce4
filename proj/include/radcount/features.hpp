// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "radcount/core.hpp"

namespace radcount::features {

inline constexpr int kFeatureDim = 18;

/// 18-dim statistical summary of a cube. Layout is frozen:
/// [mean-series block | std-series block | gini-series block], each block
/// holding (median, max, min, p75, p25, std) of the per-frame series.
using FeatureVector = std::array<double, kFeatureDim>;

double frame_mean(const FrameMap& frame);

/// Population standard deviation over the frame's 1092 entries.
double frame_std(const FrameMap& frame);

/// Gini coefficient over the frame's entries (all must be >= 0):
/// G = (2 * sum_i i*x_(i)) / (n * sum x) - (n+1)/n on the ascending sort;
/// an all-zero frame yields 0.
double frame_gini(const FrameMap& frame);

/// (median, max, min, p75, p25, population std) of a non-empty series,
/// linear-interpolation percentiles.
std::array<double, 6> summarize(std::span<const double> series);

FeatureVector extract_features(const RadarCube& cube);

/// A labeled feature row as written to / read from the features CSV.
struct FeatureRow {
  FeatureVector values{};
  int label = 0;
  std::string environment;
  std::string split;
};

/// CSV with columns f00..f17,label,environment,split.
void save_features_csv(const std::vector<FeatureRow>& rows, const std::string& path);
std::vector<FeatureRow> load_features_csv(const std::string& path);

}  // namespace radcount::features

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace radcount::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty range");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Population convention (divide by N), per the pipeline-wide choice.
inline double population_variance(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size());
}

inline double population_std(std::span<const double> xs) {
  return std::sqrt(population_variance(xs));
}

/// Percentile by linear interpolation between order statistics:
/// rank = pct/100 * (n-1), result interpolates the two bracketing values.
/// `sorted` must be ascending.
inline double percentile_sorted(std::span<const double> sorted, double pct) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty range");
  if (pct < 0.0 || pct > 100.0) throw std::invalid_argument("percentile outside [0,100]");
  const double rank = pct / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  if (lo == hi) return sorted[lo];
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double percentile(std::vector<double> xs, double pct) {
  std::sort(xs.begin(), xs.end());
  return percentile_sorted(xs, pct);
}

}  // namespace radcount::stats

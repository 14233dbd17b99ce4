// SPDX-License-Identifier: Apache-2.0
#include "radcount/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "radcount/stats.hpp"

namespace radcount::features {

double frame_mean(const FrameMap& frame) { return stats::mean(frame.v); }

double frame_std(const FrameMap& frame) { return stats::population_std(frame.v); }

double frame_gini(const FrameMap& frame) {
  double total = 0.0;
  for (double x : frame.v) {
    if (x < 0.0) throw std::invalid_argument("frame_gini: negative entry");
    total += x;
  }
  if (total == 0.0) return 0.0;
  std::vector<double> sorted(frame.v.begin(), frame.v.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    weighted += static_cast<double>(i + 1) * sorted[i];
  return (2.0 * weighted) / (n * total) - (n + 1.0) / n;
}

std::array<double, 6> summarize(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("summarize: empty series");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  return {stats::percentile_sorted(sorted, 50.0),
          sorted.back(),
          sorted.front(),
          stats::percentile_sorted(sorted, 75.0),
          stats::percentile_sorted(sorted, 25.0),
          stats::population_std(series)};
}

FeatureVector extract_features(const RadarCube& cube) {
  if (!cube.has_sensor_grid())
    throw std::invalid_argument("extract_features: cube is not 12x91");
  if (cube.frames < 1) throw std::invalid_argument("extract_features: empty cube");

  std::vector<double> means(cube.frames), stds(cube.frames), ginis(cube.frames);
  for (int f = 0; f < cube.frames; ++f) {
    FrameMap frame;
    for (int r = 0; r < kGridRows; ++r)
      for (int c = 0; c < kGridCols; ++c) frame.at(r, c) = cube.at(f, r, c);
    means[f] = frame_mean(frame);
    stds[f] = frame_std(frame);
    ginis[f] = frame_gini(frame);
  }

  FeatureVector out{};
  const std::array<const std::vector<double>*, 3> blocks = {&means, &stds, &ginis};
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto s = summarize(*blocks[b]);
    std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(6 * b));
  }
  return out;
}

void save_features_csv(const std::vector<FeatureRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  for (int i = 0; i < kFeatureDim; ++i) {
    char col[8];
    std::snprintf(col, sizeof col, "f%02d", i);
    f << col << ",";
  }
  f << "label,environment,split\n";
  for (const auto& row : rows) {
    for (double x : row.values) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      f << buf << ",";
    }
    f << row.label << "," << row.environment << "," << row.split << "\n";
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<FeatureRow> load_features_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open features csv: " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
  std::vector<FeatureRow> rows;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    FeatureRow row;
    for (int i = 0; i < kFeatureDim; ++i) {
      if (!std::getline(ss, cell, ','))
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": short row");
      row.values[static_cast<std::size_t>(i)] = std::stod(cell);
    }
    if (!std::getline(ss, cell, ','))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing label");
    row.label = std::stoi(cell);
    if (!std::getline(ss, row.environment, ','))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing environment");
    if (!std::getline(ss, row.split, ','))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing split");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace radcount::features

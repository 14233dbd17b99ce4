// SPDX-License-Identifier: Apache-2.0
#include "radcount/rulecc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "radcount/preprocess.hpp"

namespace radcount::rulecc {

void RuleCCConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("rulecc config: tau must be > 0");
  if (threshold_factors.empty())
    throw std::invalid_argument("rulecc config: need at least one threshold factor");
  for (std::size_t i = 0; i < threshold_factors.size(); ++i) {
    const double f = threshold_factors[i];
    if (!(f > 0.0 && f <= 1.0))
      throw std::invalid_argument("rulecc config: threshold factors must lie in (0,1]");
    if (i > 0 && !(f < threshold_factors[i - 1]))
      throw std::invalid_argument("rulecc config: threshold factors must be descending");
  }
  if (!(gaussian_sigma > 0.0)) throw std::invalid_argument("rulecc config: gaussian_sigma must be > 0");
  if (erosion_iters < 0 || dilation_iters < 0)
    throw std::invalid_argument("rulecc config: morphology iterations must be >= 0");
  if (area_min > area_max) throw std::invalid_argument("rulecc config: area_min > area_max");
  if (compactness_min < 0.0 || compactness_min > 1.0)
    throw std::invalid_argument("rulecc config: compactness_min must lie in [0,1]");
  if (window_sizes.empty()) throw std::invalid_argument("rulecc config: empty window set");
  for (int w : window_sizes)
    if (w < 2) throw std::invalid_argument("rulecc config: window sizes must be >= 2");
  if (!(nonzero_ratio > 0.0 && nonzero_ratio < 1.0))
    throw std::invalid_argument("rulecc config: nonzero_ratio must lie in (0,1)");
}

RuleCCConfig RuleCCConfig::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open rulecc config: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  RuleCCConfig cfg;
  if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
  if (j.contains("threshold_factors"))
    cfg.threshold_factors = j.at("threshold_factors").get<std::vector<double>>();
  if (j.contains("gaussian_sigma")) cfg.gaussian_sigma = j.at("gaussian_sigma").get<double>();
  if (j.contains("erosion_iters")) cfg.erosion_iters = j.at("erosion_iters").get<int>();
  if (j.contains("dilation_iters")) cfg.dilation_iters = j.at("dilation_iters").get<int>();
  if (j.contains("area_min")) cfg.area_min = j.at("area_min").get<int>();
  if (j.contains("area_max")) cfg.area_max = j.at("area_max").get<int>();
  if (j.contains("compactness_min")) cfg.compactness_min = j.at("compactness_min").get<double>();
  if (j.contains("window_sizes")) cfg.window_sizes = j.at("window_sizes").get<std::vector<int>>();
  if (j.contains("nonzero_ratio")) cfg.nonzero_ratio = j.at("nonzero_ratio").get<double>();
  cfg.validate();
  return cfg;
}

std::string RuleCCConfig::to_json() const {
  nlohmann::json j;
  j["tau"] = tau;
  j["threshold_factors"] = threshold_factors;
  j["gaussian_sigma"] = gaussian_sigma;
  j["erosion_iters"] = erosion_iters;
  j["dilation_iters"] = dilation_iters;
  j["area_min"] = area_min;
  j["area_max"] = area_max;
  j["compactness_min"] = compactness_min;
  j["window_sizes"] = window_sizes;
  j["nonzero_ratio"] = nonzero_ratio;
  return j.dump(2);
}

int BinaryMask::count_ones() const {
  int n = 0;
  for (std::uint8_t b : v) n += b;
  return n;
}

StdMap gaussian_smooth(const StdMap& map, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_smooth: sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int k = 2 * radius + 1;
  std::vector<double> kernel(static_cast<std::size_t>(k) * k);
  double sum = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      kernel[static_cast<std::size_t>(dy + radius) * k + (dx + radius)] = w;
      sum += w;
    }
  for (double& w : kernel) w /= sum;

  StdMap out;
  for (int r = 0; r < kGridRows; ++r) {
    for (int c = 0; c < kGridCols; ++c) {
      double acc = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int rr = r + dy;
        if (rr < 0 || rr >= kGridRows) continue;  // zero padding
        for (int dx = -radius; dx <= radius; ++dx) {
          const int cc = c + dx;
          if (cc < 0 || cc >= kGridCols) continue;
          acc += map.at(rr, cc) * kernel[static_cast<std::size_t>(dy + radius) * k + (dx + radius)];
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

BinaryMask binarize(const StdMap& map, double threshold) {
  if (!std::isfinite(threshold)) throw std::invalid_argument("binarize: non-finite threshold");
  BinaryMask m;
  for (std::size_t i = 0; i < m.v.size(); ++i) m.v[i] = map.v[i] > threshold ? 1 : 0;
  return m;
}

BinaryMask erode4(const BinaryMask& mask, int iterations) {
  if (iterations < 0) throw std::invalid_argument("erode4: negative iterations");
  BinaryMask cur = mask;
  for (int it = 0; it < iterations; ++it) {
    BinaryMask next;
    for (int r = 0; r < kGridRows; ++r)
      for (int c = 0; c < kGridCols; ++c) {
        const bool keep = cur.at(r, c) && (r > 0 && cur.at(r - 1, c)) &&
                          (r + 1 < kGridRows && cur.at(r + 1, c)) &&
                          (c > 0 && cur.at(r, c - 1)) && (c + 1 < kGridCols && cur.at(r, c + 1));
        next.at(r, c) = keep ? 1 : 0;
      }
    cur = next;
  }
  return cur;
}

BinaryMask dilate4(const BinaryMask& mask, int iterations) {
  if (iterations < 0) throw std::invalid_argument("dilate4: negative iterations");
  BinaryMask cur = mask;
  for (int it = 0; it < iterations; ++it) {
    BinaryMask next;
    for (int r = 0; r < kGridRows; ++r)
      for (int c = 0; c < kGridCols; ++c) {
        const bool on = cur.at(r, c) || (r > 0 && cur.at(r - 1, c)) ||
                        (r + 1 < kGridRows && cur.at(r + 1, c)) ||
                        (c > 0 && cur.at(r, c - 1)) || (c + 1 < kGridCols && cur.at(r, c + 1));
        next.at(r, c) = on ? 1 : 0;
      }
    cur = next;
  }
  return cur;
}

Component component_metrics(std::vector<int> pixels) {
  if (pixels.empty()) throw std::invalid_argument("component_metrics: empty component");
  Component comp;
  comp.area = static_cast<int>(pixels.size());
  std::vector<char> member(kGridCells, 0);
  for (int p : pixels) member[static_cast<std::size_t>(p)] = 1;
  int perimeter = 0;
  for (int p : pixels) {
    const int r = p / kGridCols, c = p % kGridCols;
    int inside = 0;
    if (r > 0 && member[static_cast<std::size_t>(p - kGridCols)]) ++inside;
    if (r + 1 < kGridRows && member[static_cast<std::size_t>(p + kGridCols)]) ++inside;
    if (c > 0 && member[static_cast<std::size_t>(p - 1)]) ++inside;
    if (c + 1 < kGridCols && member[static_cast<std::size_t>(p + 1)]) ++inside;
    perimeter += 4 - inside;
  }
  comp.perimeter = perimeter;
  comp.compactness = 4.0 * std::numbers::pi * comp.area /
                     (static_cast<double>(perimeter) * perimeter);
  comp.pixels = std::move(pixels);
  return comp;
}

ComponentSet label_components_4(const BinaryMask& mask) {
  ComponentSet out;
  std::vector<char> seen(kGridCells, 0);
  std::vector<int> stack;
  for (int start = 0; start < kGridCells; ++start) {
    if (!mask.v[static_cast<std::size_t>(start)] || seen[static_cast<std::size_t>(start)]) continue;
    std::vector<int> pixels;
    stack.assign(1, start);
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      pixels.push_back(p);
      const int r = p / kGridCols, c = p % kGridCols;
      const int neighbors[4] = {r > 0 ? p - kGridCols : -1, r + 1 < kGridRows ? p + kGridCols : -1,
                                c > 0 ? p - 1 : -1, c + 1 < kGridCols ? p + 1 : -1};
      for (int q : neighbors) {
        if (q < 0 || seen[static_cast<std::size_t>(q)] || !mask.v[static_cast<std::size_t>(q)])
          continue;
        seen[static_cast<std::size_t>(q)] = 1;
        stack.push_back(q);
      }
    }
    std::sort(pixels.begin(), pixels.end());
    out.push_back(component_metrics(std::move(pixels)));
  }
  return out;
}

ComponentSet valid_components(const ComponentSet& cs, const RuleCCConfig& cfg) {
  ComponentSet out;
  for (const auto& c : cs)
    if (c.area >= cfg.area_min && c.area <= cfg.area_max && c.compactness >= cfg.compactness_min)
      out.push_back(c);
  return out;
}

namespace {

WindowPrediction count_window_detail(const RadarCube& window, int start, const RuleCCConfig& cfg) {
  const StdMap sigma = preprocess::temporal_std_map(window);
  const StdMap smooth = gaussian_smooth(sigma, cfg.gaussian_sigma);
  WindowPrediction wp;
  wp.window_start = start;
  wp.window_size = window.frames;
  int best = 0;
  for (double factor : cfg.threshold_factors) {
    BinaryMask mask = binarize(smooth, factor * cfg.tau);
    mask = erode4(mask, cfg.erosion_iters);
    mask = dilate4(mask, cfg.dilation_iters);
    const int n = static_cast<int>(valid_components(label_components_4(mask), cfg).size());
    wp.per_threshold_counts.push_back(n);
    best = std::max(best, n);
  }
  wp.count = best;
  return wp;
}

/// Mode with frequency ties resolved toward the larger count.
int mode_prefer_larger(const std::map<int, int>& histogram) {
  int best_count = -1, best_freq = 0;
  for (const auto& [count, freq] : histogram) {
    if (freq > best_freq || (freq == best_freq && count > best_count)) {
      best_count = count;
      best_freq = freq;
    }
  }
  return best_count;
}

}  // namespace

int count_window(const RadarCube& window, const RuleCCConfig& cfg) {
  cfg.validate();
  return count_window_detail(window, 0, cfg).count;
}

int integrate_window_counts(const std::vector<int>& counts, double nonzero_ratio) {
  if (counts.empty()) throw std::invalid_argument("integrate_window_counts: empty pool");
  std::map<int, int> all, nonzero;
  int nonzero_windows = 0;
  for (int c : counts) {
    ++all[c];
    if (c > 0) {
      ++nonzero[c];
      ++nonzero_windows;
    }
  }
  const double fraction = static_cast<double>(nonzero_windows) / static_cast<double>(counts.size());
  return fraction > nonzero_ratio ? mode_prefer_larger(nonzero) : mode_prefer_larger(all);
}

SequencePrediction predict_sequence_explained(const RadarCube& cube, const RuleCCConfig& cfg) {
  cfg.validate();
  SequencePrediction result;
  for (int w : cfg.window_sizes) {
    if (w > cube.frames) continue;  // longer windows are skipped, not errors
    const int step = std::max(1, w / 4);
    for (int start = 0; start + w <= cube.frames; start += step)
      result.windows.push_back(count_window_detail(slice_window(cube, start, w), start, cfg));
  }
  if (result.windows.empty())
    throw std::invalid_argument("predict_sequence: cube shorter than every window size");

  std::vector<int> pool;
  pool.reserve(result.windows.size());
  for (const auto& wp : result.windows) pool.push_back(wp.count);
  result.count = integrate_window_counts(pool, cfg.nonzero_ratio);
  return result;
}

int predict_sequence(const RadarCube& cube, const RuleCCConfig& cfg) {
  return predict_sequence_explained(cube, cfg).count;
}

}  // namespace radcount::rulecc

// SPDX-License-Identifier: Apache-2.0
#include "radcount/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "radcount/stats.hpp"

namespace radcount::preprocess {

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open preprocess config: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  PipelineConfig cfg;
  if (j.contains("lo_pct")) cfg.lo_pct = j.at("lo_pct").get<double>();
  if (j.contains("hi_pct")) cfg.hi_pct = j.at("hi_pct").get<double>();
  if (j.contains("sigmoid")) {
    const auto& s = j.at("sigmoid");
    if (s.contains("tau_w") && !s.at("tau_w").is_string())
      cfg.sigmoid.tau_w = s.at("tau_w").get<double>();
    if (s.contains("s") && !s.at("s").is_string())
      cfg.sigmoid.s = s.at("s").get<double>();
  }
  if (cfg.lo_pct < 0.0 || cfg.hi_pct > 100.0 || cfg.lo_pct >= cfg.hi_pct)
    throw std::runtime_error("preprocess config: need 0 <= lo_pct < hi_pct <= 100");
  if (cfg.sigmoid.s && *cfg.sigmoid.s <= 0.0)
    throw std::runtime_error("preprocess config: sigmoid s must be > 0");
  return cfg;
}

std::string PipelineConfig::to_json() const {
  nlohmann::json j;
  j["lo_pct"] = lo_pct;
  j["hi_pct"] = hi_pct;
  j["sigmoid"]["tau_w"] = sigmoid.tau_w ? nlohmann::json(*sigmoid.tau_w) : nlohmann::json("auto");
  j["sigmoid"]["s"] = sigmoid.s ? nlohmann::json(*sigmoid.s) : nlohmann::json("auto");
  return j.dump(2);
}

std::pair<double, double> percentile_band(const RadarCube& cube, double lo_pct, double hi_pct) {
  if (cube.value_count() == 0) throw std::invalid_argument("percentile_band: empty cube");
  if (lo_pct < 0.0 || hi_pct > 100.0 || lo_pct >= hi_pct)
    throw std::invalid_argument("percentile_band: need 0 <= lo_pct < hi_pct <= 100");
  std::vector<double> xs(cube.data.begin(), cube.data.end());
  std::sort(xs.begin(), xs.end());
  return {stats::percentile_sorted(xs, lo_pct), stats::percentile_sorted(xs, hi_pct)};
}

RadarCube clip_to_band(const RadarCube& cube, double lo_value, double hi_value) {
  RadarCube out = cube;
  const auto lo = static_cast<float>(lo_value);
  const auto hi = static_cast<float>(hi_value);
  for (float& x : out.data) x = std::clamp(x, lo, hi);
  return out;
}

RadarCube clip_percentiles(const RadarCube& cube, double lo_pct, double hi_pct) {
  const auto [lo, hi] = percentile_band(cube, lo_pct, hi_pct);
  return clip_to_band(cube, lo, hi);
}

RadarCube minmax_normalize(const RadarCube& cube) {
  if (cube.value_count() == 0) throw std::invalid_argument("minmax_normalize: empty cube");
  const auto [mn_it, mx_it] = std::minmax_element(cube.data.begin(), cube.data.end());
  const double mn = *mn_it, mx = *mx_it;
  RadarCube out = cube;
  if (mx == mn) {
    // Constant cube carries no signal.
    std::fill(out.data.begin(), out.data.end(), 0.0f);
    return out;
  }
  const double scale = 1.0 / (mx - mn);
  for (float& x : out.data) x = static_cast<float>((static_cast<double>(x) - mn) * scale);
  return out;
}

StdMap temporal_std_map(const RadarCube& cube) {
  if (!cube.has_sensor_grid())
    throw std::invalid_argument("temporal_std_map: cube is not 12x91");
  if (cube.frames < 2)
    throw std::invalid_argument("temporal_std_map: need at least 2 frames");
  StdMap out;
  const double inv_t = 1.0 / static_cast<double>(cube.frames);
  for (int r = 0; r < kGridRows; ++r) {
    for (int c = 0; c < kGridCols; ++c) {
      double sum = 0.0;
      for (int f = 0; f < cube.frames; ++f) sum += cube.at(f, r, c);
      const double m = sum * inv_t;
      double ss = 0.0;
      for (int f = 0; f < cube.frames; ++f) {
        const double d = cube.at(f, r, c) - m;
        ss += d * d;
      }
      out.at(r, c) = std::sqrt(ss * inv_t);
    }
  }
  return out;
}

ResolvedSigmoid resolve_sigmoid(const StdMap& std_map, const SigmoidWeightConfig& cfg) {
  ResolvedSigmoid r{};
  if (cfg.tau_w && cfg.s) {
    r.tau_w = *cfg.tau_w;
    r.s = *cfg.s;
  } else {
    const double m = stats::mean(std_map.v);
    const double sd = stats::population_std(std_map.v);
    r.tau_w = cfg.tau_w.value_or(m);
    r.s = cfg.s.value_or(std::max(sd, 1e-6));
  }
  if (!(r.s > 0.0) || !std::isfinite(r.s) || !std::isfinite(r.tau_w))
    throw std::invalid_argument("sigmoid config: s must be finite and > 0");
  return r;
}

WeightMap sigmoid_weight_map(const StdMap& std_map, const ResolvedSigmoid& cfg) {
  WeightMap w;
  for (std::size_t i = 0; i < w.v.size(); ++i)
    w.v[i] = 1.0 / (1.0 + std::exp(-(std_map.v[i] - cfg.tau_w) / cfg.s));
  return w;
}

RadarCube apply_weights(const RadarCube& cube, const WeightMap& w) {
  if (!cube.has_sensor_grid())
    throw std::invalid_argument("apply_weights: cube is not 12x91");
  RadarCube out = cube;
  for (int f = 0; f < cube.frames; ++f)
    for (int r = 0; r < kGridRows; ++r)
      for (int c = 0; c < kGridCols; ++c)
        out.at(f, r, c) = static_cast<float>(cube.at(f, r, c) * w.at(r, c));
  return out;
}

RadarCube clip_and_normalize(const RadarCube& cube, const PipelineConfig& cfg) {
  return minmax_normalize(clip_percentiles(cube, cfg.lo_pct, cfg.hi_pct));
}

RadarCube preprocess_pipeline(const RadarCube& cube, const PipelineConfig& cfg) {
  const RadarCube normalized = clip_and_normalize(cube, cfg);
  const StdMap sigma = temporal_std_map(normalized);
  const ResolvedSigmoid rs = resolve_sigmoid(sigma, cfg.sigmoid);
  return apply_weights(normalized, sigmoid_weight_map(sigma, rs));
}

}  // namespace radcount::preprocess

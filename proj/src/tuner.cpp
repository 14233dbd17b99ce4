// SPDX-License-Identifier: Apache-2.0
#include "radcount/tuner.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "radcount/parallel.hpp"

namespace radcount::tuner {

std::vector<double> tau_grid(const GridSpec& spec) {
  if (spec.tau_points < 2) throw std::invalid_argument("tau_grid: need at least 2 points");
  if (!(spec.tau_lo < spec.tau_hi)) throw std::invalid_argument("tau_grid: need tau_lo < tau_hi");
  std::vector<double> taus(static_cast<std::size_t>(spec.tau_points));
  for (int i = 0; i < spec.tau_points; ++i)
    taus[static_cast<std::size_t>(i)] =
        spec.tau_lo + (spec.tau_hi - spec.tau_lo) * i / (spec.tau_points - 1);
  taus.front() = spec.tau_lo;
  taus.back() = spec.tau_hi;
  return taus;
}

TuneResult tune(const std::vector<LabeledCube>& dataset, const GridSpec& spec,
                const rulecc::RuleCCConfig& base_config, const metrics::CompositeWeights& weights,
                int threads) {
  if (dataset.empty()) throw std::invalid_argument("tune: empty dataset");
  if (spec.window_sizes.empty()) throw std::invalid_argument("tune: empty window axis");
  const std::vector<double> taus = tau_grid(spec);

  // Ascending axes make "first best wins" equal the documented tie-break
  // (higher score, then smaller W, then smaller tau).
  std::vector<int> windows = spec.window_sizes;
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());

  TuneResult result;
  result.table.resize(windows.size() * taus.size());
  parallel_for(result.table.size(), threads, [&](std::size_t cell_idx) {
    const std::size_t wi = cell_idx / taus.size();
    const std::size_t ti = cell_idx % taus.size();
    GridCell cell;
    cell.window_size = windows[wi];
    cell.tau = taus[ti];

    rulecc::RuleCCConfig cfg = base_config;
    cfg.tau = cell.tau;
    cfg.window_sizes = {cell.window_size};

    std::vector<int> preds, labels;
    for (const auto& sample : dataset) {
      if (sample.cube.frames < cell.window_size) {
        ++cell.skipped_samples;
        continue;
      }
      preds.push_back(std::min(rulecc::predict_sequence(sample.cube, cfg), 3));
      labels.push_back(sample.label);
      ++cell.evaluated_samples;
    }
    if (!preds.empty()) {
      metrics::EvalReport rep = metrics::evaluate(metrics::confusion(preds, labels));
      rep.composite = metrics::composite_score(rep, weights);
      std::vector<double> pd(preds.begin(), preds.end());
      std::vector<double> ld(labels.begin(), labels.end());
      rep.mae = metrics::mae(pd, ld);
      rep.rmse = metrics::rmse(pd, ld);
      cell.report = rep;
    }
    result.table[cell_idx] = std::move(cell);
  });

  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const auto& cell = result.table[i];
    if (cell.evaluated_samples == 0) {
      std::fprintf(stderr, "tune: cell (W=%d, tau=%g) skipped every cube\n", cell.window_size,
                   cell.tau);
      continue;
    }
    // Tie-break: higher score, then smaller W, then smaller tau. Cells are
    // enumerated in exactly that order, so strict improvement suffices.
    if (result.best_index < 0 || cell.report.composite > result.best_score) {
      result.best_index = static_cast<int>(i);
      result.best_score = cell.report.composite;
    }
  }
  if (result.best_index < 0) throw std::runtime_error("tune: no cell evaluated any sample");

  result.best_config = base_config;
  result.best_config.tau = result.table[static_cast<std::size_t>(result.best_index)].tau;
  result.best_config.window_sizes = {
      result.table[static_cast<std::size_t>(result.best_index)].window_size};
  return result;
}

namespace {

nlohmann::json cell_json(const GridCell& c) {
  return {{"window", c.window_size},
          {"tau", c.tau},
          {"accuracy", c.report.accuracy},
          {"f1_macro", c.report.f1_macro},
          {"f1_minority", c.report.f1_minority},
          {"recall_minority", c.report.recall_minority},
          {"r_nonzero", c.report.r_nonzero},
          {"composite", c.report.composite},
          {"evaluated", c.evaluated_samples},
          {"skipped", c.skipped_samples}};
}

}  // namespace

void save_tune_json(const TuneResult& result, const std::string& path) {
  nlohmann::json j;
  j["best"] = cell_json(result.table[static_cast<std::size_t>(result.best_index)]);
  j["best_score"] = result.best_score;
  auto rows = nlohmann::json::array();
  for (const auto& c : result.table) rows.push_back(cell_json(c));
  j["table"] = rows;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << j.dump(2) << "\n";
}

void save_tune_csv(const TuneResult& result, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "window,tau,accuracy,f1_macro,f1_minority,recall_minority,r_nonzero,composite,evaluated,"
       "skipped\n";
  for (const auto& c : result.table) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                  c.window_size, c.tau, c.report.accuracy, c.report.f1_macro,
                  c.report.f1_minority, c.report.recall_minority, c.report.r_nonzero,
                  c.report.composite, c.evaluated_samples, c.skipped_samples);
    f << buf;
  }
}

}  // namespace radcount::tuner

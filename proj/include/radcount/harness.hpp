// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "radcount/baselines.hpp"
#include "radcount/core.hpp"
#include "radcount/metrics.hpp"
#include "radcount/preprocess.hpp"
#include "radcount/rulecc.hpp"
#include "radcount/tuner.hpp"

namespace radcount::harness {

struct NamedManifest {
  std::string name;  // e.g. envA_test, envB_test
  std::string path;
};

/// Cross-environment protocol: fit on the train/val splits of the training
/// manifests, evaluate on the test split of every named test manifest. The
/// first test manifest is the in-domain reference for the drop table. Test
/// entries never reach fitting.
struct ExperimentPlan {
  std::string train_manifest;
  std::vector<NamedManifest> test_manifests;
  std::vector<std::string> families = {"rulecc", "knn", "rf", "svm"};
  rulecc::RuleCCConfig rule_config;
  preprocess::PipelineConfig pre_config;
  bool rule_on_weighted = true;   // false: std maps from the clipped+normalized cube
  bool features_on_raw = false;   // true: skip preprocessing before feature extraction
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct ExperimentResult {
  // family -> test name -> report
  std::map<std::string, std::map<std::string, metrics::EvalReport>> reports;
  std::map<std::string, baselines::GridSearchReport> grid_reports;
  std::string drop_table_csv;
  std::string summary_json;
};

ExperimentResult run_experiment(const ExperimentPlan& plan);

/// A manifest entry loaded and conditioned for the counting pipeline.
struct PreparedSample {
  RadarCube cube;  // conditioned per the plan switches
  int label = 0;
  std::string environment;
  std::string split;
};

std::vector<PreparedSample> load_prepared(const std::string& manifest_path,
                                          const std::string& split,
                                          const preprocess::PipelineConfig& pre_config,
                                          bool weighted, int threads);

struct FixtureCheck {
  std::string name;
  double computed = 0.0;
  double published = 0.0;
  bool pass = false;
};

struct FixtureVerification {
  std::vector<FixtureCheck> checks;
  bool all_pass = false;
};

/// Recomputes 4-class and binary accuracy from the shipped confusion
/// matrices and compares against the published values within 5e-5
/// (plus a 1e-12 guard for the decimal boundaries).
FixtureVerification verify_reference_fixtures(const std::string& fixtures_path);

inline constexpr double kFixtureTolerance = 5e-5 + 1e-12;

}  // namespace radcount::harness

// SPDX-License-Identifier: Apache-2.0
#include "radcount/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "radcount/features.hpp"
#include "radcount/parallel.hpp"

namespace radcount::harness {

void ExperimentPlan::validate() const {
  if (train_manifest.empty()) throw std::runtime_error("experiment plan: missing train manifest");
  if (test_manifests.empty())
    throw std::runtime_error("experiment plan: need at least one test manifest");
  if (families.empty()) throw std::runtime_error("experiment plan: no model families selected");
  for (const auto& f : families)
    if (f != "rulecc" && f != "knn" && f != "rf" && f != "svm")
      throw std::runtime_error("experiment plan: unknown family '" + f + "'");
  if (out_dir.empty()) throw std::runtime_error("experiment plan: missing output directory");
  rule_config.validate();
}

std::vector<PreparedSample> load_prepared(const std::string& manifest_path,
                                          const std::string& split,
                                          const preprocess::PipelineConfig& pre_config,
                                          bool weighted, int threads) {
  if (!std::filesystem::exists(manifest_path))
    throw std::runtime_error("manifest not found: " + manifest_path);
  const DatasetManifest manifest = load_manifest(manifest_path);
  std::vector<ManifestEntry> wanted;
  for (const auto& e : manifest.entries)
    if (split.empty() || e.split == split) wanted.push_back(e);

  std::vector<PreparedSample> out(wanted.size());
  parallel_for(wanted.size(), threads, [&](std::size_t i) {
    const auto& e = wanted[i];
    const RadarCube raw = load_cube(resolve_manifest_path(manifest_path, e.path));
    PreparedSample s;
    s.cube = weighted ? preprocess::preprocess_pipeline(raw, pre_config)
                      : preprocess::clip_and_normalize(raw, pre_config);
    s.label = e.label;
    s.environment = e.environment;
    s.split = e.split;
    out[i] = std::move(s);
  });
  return out;
}

namespace {

struct LabeledFeatures {
  baselines::FeatureMatrix x;
  std::vector<double> y;
  std::vector<int> labels;
};

LabeledFeatures to_features(const std::vector<PreparedSample>& samples) {
  LabeledFeatures out;
  out.x.resize(samples.size());
  out.y.resize(samples.size());
  out.labels.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.x[i] = features::extract_features(samples[i].cube);
    out.y[i] = samples[i].label;
    out.labels[i] = samples[i].label;
  }
  return out;
}

metrics::EvalReport evaluate_continuous(const std::vector<double>& preds,
                                        const std::vector<int>& labels) {
  const std::vector<int> classes = baselines::round_and_clamp_all(preds);
  return metrics::evaluate(preds, classes, labels);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  std::filesystem::create_directories(plan.out_dir);

  const bool wants_rule = std::count(plan.families.begin(), plan.families.end(), "rulecc") > 0;
  std::vector<std::string> learner_families;
  for (const auto& f : plan.families)
    if (f != "rulecc") learner_families.push_back(f);

  // Disjointness guard: sample ids (paths) must not recur across manifests.
  {
    std::set<std::string> manifest_paths{plan.train_manifest};
    for (const auto& t : plan.test_manifests) manifest_paths.insert(t.path);
    std::set<std::string> seen;
    for (const auto& manifest_path : manifest_paths)
      for (const auto& e : load_manifest(manifest_path).entries)
        if (!seen.insert(std::filesystem::path(e.path).filename().string()).second)
          throw std::runtime_error("experiment plan: sample id " + e.path +
                                   " appears in more than one manifest role");
  }

  // Conditioning for the learners (features) and the rule-based counter.
  LabeledFeatures train_feats, val_feats;
  if (!learner_families.empty()) {
    const auto train_samples =
        load_prepared(plan.train_manifest, "train",
                      plan.pre_config, !plan.features_on_raw, plan.threads);
    const auto val_samples = load_prepared(plan.train_manifest, "val", plan.pre_config,
                                           !plan.features_on_raw, plan.threads);
    if (train_samples.empty() || val_samples.empty())
      throw std::runtime_error("experiment plan: train manifest needs train and val splits");
    train_feats = to_features(train_samples);
    val_feats = to_features(val_samples);
  }

  ExperimentResult result;

  // Fit learners once on A-train, model selection on A-val. A family that
  // fails to fit is reported and dropped; the others keep running.
  std::map<std::string, baselines::AnyModel> fitted;
  std::map<std::string, std::string> fit_errors;
  for (const auto& fam : learner_families) {
    try {
      baselines::GridSearchReport grid_report;
      fitted[fam] = baselines::grid_search_model(train_feats.x, train_feats.y, val_feats.x,
                                                 val_feats.y, baselines::family_from_string(fam),
                                                 plan.seed, &grid_report, plan.threads);
      result.grid_reports[fam] = grid_report;
    } catch (const std::exception& e) {
      fit_errors[fam] = e.what();
      std::fprintf(stderr, "experiment: %s fit failed: %s\n", fam.c_str(), e.what());
    }
  }
  learner_families.erase(std::remove_if(learner_families.begin(), learner_families.end(),
                                        [&](const std::string& f) { return fit_errors.count(f); }),
                         learner_families.end());

  for (const auto& test : plan.test_manifests) {
    // Rule path and feature path may condition cubes differently.
    std::vector<int> labels;
    std::vector<double> rule_preds;
    if (wants_rule) {
      const auto samples = load_prepared(test.path, "test", plan.pre_config,
                                         plan.rule_on_weighted, plan.threads);
      if (samples.empty()) throw std::runtime_error("no test split in " + test.path);
      rule_preds.resize(samples.size());
      labels.resize(samples.size());
      parallel_for(samples.size(), plan.threads, [&](std::size_t i) {
        rule_preds[i] = std::min(rulecc::predict_sequence(samples[i].cube, plan.rule_config), 3);
        labels[i] = samples[i].label;
      });
      result.reports["rulecc"][test.name] = evaluate_continuous(rule_preds, labels);
    }
    if (!learner_families.empty()) {
      const auto samples = load_prepared(test.path, "test", plan.pre_config,
                                         !plan.features_on_raw, plan.threads);
      if (samples.empty()) throw std::runtime_error("no test split in " + test.path);
      const LabeledFeatures feats = to_features(samples);
      for (const auto& fam : learner_families) {
        std::vector<double> preds(feats.x.size());
        for (std::size_t i = 0; i < feats.x.size(); ++i)
          preds[i] = fitted[fam].predict(feats.x[i]);
        result.reports[fam][test.name] = evaluate_continuous(preds, feats.labels);
      }
    }
  }

  // Reports per family/test.
  for (const auto& [fam, per_test] : result.reports)
    for (const auto& [test_name, report] : per_test) {
      const auto path =
          std::filesystem::path(plan.out_dir) / ("report_" + fam + "_" + test_name + ".json");
      std::ofstream f(path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + path.string());
      f << report.to_json() << "\n";
    }

  // Drop table against the first (in-domain) test manifest.
  const std::string& reference = plan.test_manifests.front().name;
  std::ostringstream csv;
  csv << "model,test,accuracy,binary_accuracy,accuracy_drop,binary_drop\n";
  char buf[256];
  for (const auto& fam : plan.families) {
    if (!result.reports.count(fam)) continue;  // fit failure already surfaced
    const auto& per_test = result.reports.at(fam);
    const auto& ref = per_test.at(reference);
    for (const auto& t : plan.test_manifests) {
      const auto& rep = per_test.at(t.name);
      std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.6f\n", fam.c_str(), t.name.c_str(),
                    rep.accuracy, rep.r_nonzero, ref.accuracy - rep.accuracy,
                    ref.r_nonzero - rep.r_nonzero);
      csv << buf;
    }
  }
  result.drop_table_csv = csv.str();
  {
    std::ofstream f(std::filesystem::path(plan.out_dir) / "drop_table.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write drop table");
    f << result.drop_table_csv;
  }

  // Summary with the qualitative cross-environment note.
  nlohmann::json summary;
  summary["reference_test"] = reference;
  summary["seed"] = plan.seed;
  for (const auto& [fam, message] : fit_errors) summary["fit_errors"][fam] = message;
  for (const auto& [fam, per_test] : result.reports)
    for (const auto& [test_name, rep] : per_test) {
      summary["accuracy"][fam][test_name] = rep.accuracy;
      summary["binary_accuracy"][fam][test_name] = rep.r_nonzero;
    }
  if (plan.test_manifests.size() >= 2) {
    const std::string& shifted = plan.test_manifests[1].name;
    auto drop_of = [&](const std::string& fam) -> std::optional<double> {
      const auto it = result.reports.find(fam);
      if (it == result.reports.end()) return std::nullopt;
      return it->second.at(reference).accuracy - it->second.at(shifted).accuracy;
    };
    const auto rule_drop = drop_of("rulecc");
    double max_learner_drop = -1.0;
    std::string max_learner;
    for (const auto& fam : learner_families) {
      const auto d = drop_of(fam);
      if (d && *d > max_learner_drop) {
        max_learner_drop = *d;
        max_learner = fam;
      }
    }
    if (rule_drop && !max_learner.empty()) {
      summary["cross_environment"]["rulecc_drop"] = *rule_drop;
      summary["cross_environment"]["largest_learner_drop"] = max_learner_drop;
      summary["cross_environment"]["largest_learner"] = max_learner;
      summary["cross_environment"]["learning_drops_exceed_rule_drop"] =
          max_learner_drop > *rule_drop;
    }
  }
  for (const auto& [fam, grid] : result.grid_reports) {
    auto cells = nlohmann::json::array();
    for (const auto& c : grid.cells) cells.push_back({{"candidate", c.candidate}, {"val_mae", c.val_mae}});
    summary["grid_search"][fam]["cells"] = cells;
    summary["grid_search"][fam]["best"] = grid.cells[static_cast<std::size_t>(grid.best_index)].candidate;
  }
  result.summary_json = summary.dump(2) + "\n";
  {
    std::ofstream f(std::filesystem::path(plan.out_dir) / "summary.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write summary");
    f << result.summary_json;
  }
  return result;
}

FixtureVerification verify_reference_fixtures(const std::string& fixtures_path) {
  std::ifstream f(fixtures_path);
  if (!f) throw std::runtime_error("cannot open fixtures: " + fixtures_path);
  nlohmann::json j = nlohmann::json::parse(f);
  FixtureVerification out;
  out.all_pass = true;
  for (const auto& fixture : j.at("fixtures")) {
    metrics::ConfusionMatrix4 cm;
    const auto rows = fixture.at("confusion");
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k)
        cm.at(i, k) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k)).get<long long>();
    const std::string tag =
        fixture.at("model").get<std::string>() + "/" + fixture.at("environment").get<std::string>();

    FixtureCheck acc;
    acc.name = tag + " accuracy";
    acc.computed = metrics::accuracy(cm);
    acc.published = fixture.at("published_accuracy").get<double>();
    acc.pass = std::abs(acc.computed - acc.published) <= kFixtureTolerance;
    out.all_pass = out.all_pass && acc.pass;
    out.checks.push_back(acc);

    FixtureCheck bin;
    bin.name = tag + " binary";
    bin.computed = metrics::binary_collapse(cm);
    bin.published = fixture.at("published_binary_accuracy").get<double>();
    bin.pass = std::abs(bin.computed - bin.published) <= kFixtureTolerance;
    out.all_pass = out.all_pass && bin.pass;
    out.checks.push_back(bin);
  }
  return out;
}

}  // namespace radcount::harness

// SPDX-License-Identifier: Apache-2.0
//
// radcount CLI: synth, preprocess, extract-features, count, train, predict,
// evaluate, tune, experiment, verify-fixtures.
//
// Exit codes: 0 success, 2 validation/usage error, 3 fixture verification
// failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "radcount/baselines.hpp"
#include "radcount/features.hpp"
#include "radcount/harness.hpp"
#include "radcount/metrics.hpp"
#include "radcount/parallel.hpp"
#include "radcount/preprocess.hpp"
#include "radcount/rulecc.hpp"
#include "radcount/stats.hpp"
#include "radcount/synth.hpp"
#include "radcount/tuner.hpp"

namespace {

using namespace radcount;

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string config;  // optional JSON with "preprocess" / "rulecc" sections
};

preprocess::PipelineConfig preprocess_config(const GlobalOptions& global,
                                             const std::string& override_path) {
  if (!override_path.empty()) return preprocess::PipelineConfig::from_json_file(override_path);
  if (!global.config.empty()) {
    std::ifstream f(global.config);
    if (!f) throw std::runtime_error("cannot open config: " + global.config);
    const nlohmann::json j = nlohmann::json::parse(f);
    if (j.contains("preprocess")) {
      const auto tmp = (std::filesystem::temp_directory_path() / "radcount_pre.json").string();
      std::ofstream out(tmp);
      out << j.at("preprocess").dump();
      out.close();
      return preprocess::PipelineConfig::from_json_file(tmp);
    }
  }
  return {};
}

rulecc::RuleCCConfig rule_config(const GlobalOptions& global, const std::string& override_path) {
  if (!override_path.empty()) return rulecc::RuleCCConfig::from_json_file(override_path);
  if (!global.config.empty()) {
    std::ifstream f(global.config);
    if (!f) throw std::runtime_error("cannot open config: " + global.config);
    const nlohmann::json j = nlohmann::json::parse(f);
    if (j.contains("rulecc")) {
      const auto tmp = (std::filesystem::temp_directory_path() / "radcount_rule.json").string();
      std::ofstream out(tmp);
      out << j.at("rulecc").dump();
      out.close();
      return rulecc::RuleCCConfig::from_json_file(tmp);
    }
  }
  return {};
}

struct PredRow {
  double pred = 0.0;
  int label = 0;
};

void save_preds_csv(const std::vector<PredRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "pred,label\n";
  for (const auto& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g,%d\n", r.pred, r.label);
    f << buf;
  }
}

std::vector<PredRow> load_preds_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open predictions: " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
  std::vector<PredRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(path + ": malformed row " + line);
    rows.push_back({std::stod(line.substr(0, comma)), std::stoi(line.substr(comma + 1))});
  }
  return rows;
}

int cmd_synth(const GlobalOptions& global, const std::string& preset, int per_class, int frames,
              const std::string& out_dir) {
  synth::DatasetOptions opts;
  opts.preset = synth::preset_from_string(preset);
  opts.per_class = per_class;
  opts.seed = global.seed;
  opts.frames = frames;
  opts.out_dir = out_dir;
  const DatasetManifest m = synth::generate_dataset(opts);
  std::printf("wrote %zu samples under %s\n", m.entries.size(), out_dir.c_str());
  return 0;
}

int cmd_preprocess(const GlobalOptions& global, const std::string& in, const std::string& out,
                   const std::string& manifest, const std::string& out_dir,
                   const std::string& config_path, bool global_percentiles, bool normalized_only) {
  const preprocess::PipelineConfig cfg = preprocess_config(global, config_path);
  const auto process_one = [&](const RadarCube& cube,
                               std::optional<std::pair<double, double>> band) {
    RadarCube clipped = band ? preprocess::clip_to_band(cube, band->first, band->second)
                             : preprocess::clip_percentiles(cube, cfg.lo_pct, cfg.hi_pct);
    RadarCube normalized = preprocess::minmax_normalize(clipped);
    if (normalized_only) return normalized;
    const StdMap sigma = preprocess::temporal_std_map(normalized);
    const auto rs = preprocess::resolve_sigmoid(sigma, cfg.sigmoid);
    return preprocess::apply_weights(normalized, preprocess::sigmoid_weight_map(sigma, rs));
  };

  if (!in.empty()) {
    if (out.empty()) throw std::runtime_error("preprocess: --in requires --out");
    save_cube(process_one(load_cube(in), std::nullopt), out);
    return 0;
  }
  if (manifest.empty() || out_dir.empty())
    throw std::runtime_error("preprocess: need --in/--out or --manifest/--out-dir");

  const DatasetManifest m = load_manifest(manifest);
  std::filesystem::create_directories(out_dir);
  std::optional<std::pair<double, double>> band;
  if (global_percentiles) {
    // Dataset-global band: percentiles over every value of every cube.
    std::vector<double> all;
    for (const auto& e : m.entries) {
      const RadarCube cube = load_cube(resolve_manifest_path(manifest, e.path));
      all.insert(all.end(), cube.data.begin(), cube.data.end());
    }
    std::sort(all.begin(), all.end());
    band = {stats::percentile_sorted(all, cfg.lo_pct), stats::percentile_sorted(all, cfg.hi_pct)};
  }
  parallel_for(m.entries.size(), global.threads, [&](std::size_t i) {
    const auto& e = m.entries[i];
    const RadarCube cube = load_cube(resolve_manifest_path(manifest, e.path));
    save_cube(process_one(cube, band),
              (std::filesystem::path(out_dir) / std::filesystem::path(e.path).filename()).string());
  });
  DatasetManifest copy = m;
  for (auto& e : copy.entries) e.path = std::filesystem::path(e.path).filename().string();
  save_manifest(copy, (std::filesystem::path(out_dir) / "manifest.jsonl").string());
  std::printf("preprocessed %zu cubes into %s\n", m.entries.size(), out_dir.c_str());
  return 0;
}

int cmd_extract_features(const GlobalOptions& global, const std::string& manifest,
                         const std::string& out, const std::string& config_path, bool raw) {
  const preprocess::PipelineConfig cfg = preprocess_config(global, config_path);
  const DatasetManifest m = load_manifest(manifest);
  std::vector<features::FeatureRow> rows(m.entries.size());
  parallel_for(m.entries.size(), global.threads, [&](std::size_t i) {
    const auto& e = m.entries[i];
    RadarCube cube = load_cube(resolve_manifest_path(manifest, e.path));
    if (!raw) cube = preprocess::preprocess_pipeline(cube, cfg);
    rows[i].values = features::extract_features(cube);
    rows[i].label = e.label;
    rows[i].environment = e.environment;
    rows[i].split = e.split;
  });
  features::save_features_csv(rows, out);
  std::printf("wrote %zu feature rows to %s\n", rows.size(), out.c_str());
  return 0;
}

int cmd_count(const GlobalOptions& global, const std::string& in, const std::string& config_path,
              const std::string& pre_config_path, const std::string& std_source, bool explain) {
  const rulecc::RuleCCConfig cfg = rule_config(global, config_path);
  const preprocess::PipelineConfig pre = preprocess_config(global, pre_config_path);
  const RadarCube raw = load_cube(in);
  const RadarCube conditioned = std_source == "normalized"
                                    ? preprocess::clip_and_normalize(raw, pre)
                                    : preprocess::preprocess_pipeline(raw, pre);
  const auto result = rulecc::predict_sequence_explained(conditioned, cfg);
  if (explain) {
    for (const auto& w : result.windows) {
      nlohmann::json j{{"start", w.window_start},
                       {"size", w.window_size},
                       {"per_threshold_counts", w.per_threshold_counts},
                       {"count", w.count}};
      std::cout << j.dump() << "\n";
    }
  }
  std::printf("%d\n", result.count);
  return 0;
}

int cmd_train(const GlobalOptions& global, const std::string& family_name,
              const std::string& features_path, const std::string& out) {
  const auto rows = features::load_features_csv(features_path);
  baselines::FeatureMatrix train_x, val_x;
  std::vector<double> train_y, val_y;
  for (const auto& r : rows) {
    if (r.split == "train") {
      train_x.push_back(r.values);
      train_y.push_back(r.label);
    } else if (r.split == "val") {
      val_x.push_back(r.values);
      val_y.push_back(r.label);
    }
  }
  if (train_x.empty() || val_x.empty())
    throw std::runtime_error("train: features file needs train and val rows");
  baselines::GridSearchReport report;
  const baselines::AnyModel model =
      baselines::grid_search_model(train_x, train_y, val_x, val_y,
                                   baselines::family_from_string(family_name), global.seed,
                                   &report, global.threads);
  baselines::save_model_json(model, out);
  for (std::size_t i = 0; i < report.cells.size(); ++i)
    std::printf("%-34s val MAE %.4f%s\n", report.cells[i].candidate.c_str(),
                report.cells[i].val_mae,
                static_cast<int>(i) == report.best_index ? "  <- selected" : "");
  std::printf("saved %s\n", out.c_str());
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& features_path,
                const std::string& out, const std::string& split) {
  const baselines::AnyModel model = baselines::load_model_json(model_path);
  const auto rows = features::load_features_csv(features_path);
  std::vector<PredRow> preds;
  for (const auto& r : rows) {
    if (!split.empty() && r.split != split) continue;
    preds.push_back({model.predict(r.values), r.label});
  }
  if (preds.empty()) throw std::runtime_error("predict: no rows selected");
  save_preds_csv(preds, out);
  std::printf("wrote %zu predictions to %s\n", preds.size(), out.c_str());
  return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& out, bool two_stage) {
  const auto rows = load_preds_csv(pred_path);
  std::vector<double> preds;
  std::vector<int> labels;
  for (const auto& r : rows) {
    preds.push_back(r.pred);
    labels.push_back(r.label);
  }
  std::vector<int> classes = baselines::round_and_clamp_all(preds, two_stage);
  const metrics::EvalReport report = metrics::evaluate(preds, classes, labels);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + out);
  f << report.to_json() << "\n";
  std::cout << report.confusion.to_text();
  std::printf("accuracy %.4f  binary %.4f  mae %.4f  rmse %.4f  composite %.4f\n",
              report.accuracy, report.r_nonzero, report.mae, report.rmse, report.composite);
  return 0;
}

int cmd_tune(const GlobalOptions& global, const std::string& manifest, const std::string& out,
             const std::string& csv, const std::string& pre_config_path,
             const std::string& rule_config_path, const std::string& std_source,
             const std::string& split) {
  const preprocess::PipelineConfig pre = preprocess_config(global, pre_config_path);
  const rulecc::RuleCCConfig base = rule_config(global, rule_config_path);
  const auto samples =
      harness::load_prepared(manifest, split, pre, std_source != "normalized", global.threads);
  if (samples.empty()) throw std::runtime_error("tune: no samples in split '" + split + "'");
  std::vector<tuner::LabeledCube> data;
  data.reserve(samples.size());
  for (const auto& s : samples) data.push_back({s.cube, s.label});
  const tuner::TuneResult result = tuner::tune(data, tuner::GridSpec{}, base, {}, global.threads);
  tuner::save_tune_json(result, out);
  if (!csv.empty()) tuner::save_tune_csv(result, csv);
  const auto& best = result.table[static_cast<std::size_t>(result.best_index)];
  std::printf("best cell: W=%d tau=%.6f composite=%.4f (table of %zu cells)\n", best.window_size,
              best.tau, result.best_score, result.table.size());
  return 0;
}

int cmd_experiment(const GlobalOptions& global, const std::string& train_manifest,
                   const std::vector<std::string>& test_specs,
                   const std::vector<std::string>& families, const std::string& out_dir,
                   const std::string& pre_config_path, const std::string& rule_config_path,
                   const std::string& std_source, bool features_raw) {
  harness::ExperimentPlan plan;
  plan.train_manifest = train_manifest;
  for (const auto& spec : test_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("experiment: --test expects name=path, got " + spec);
    plan.test_manifests.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
  }
  if (!families.empty()) plan.families = families;
  plan.rule_config = rule_config(global, rule_config_path);
  plan.pre_config = preprocess_config(global, pre_config_path);
  plan.rule_on_weighted = std_source != "normalized";
  plan.features_on_raw = features_raw;
  plan.out_dir = out_dir;
  plan.seed = global.seed;
  plan.threads = global.threads;
  const harness::ExperimentResult result = harness::run_experiment(plan);
  std::fputs(result.drop_table_csv.c_str(), stdout);
  std::printf("artifacts under %s\n", out_dir.c_str());
  return 0;
}

int cmd_verify_fixtures(const std::string& fixtures_path) {
  const harness::FixtureVerification v = harness::verify_reference_fixtures(fixtures_path);
  for (const auto& c : v.checks)
    std::printf("[%s] %-18s computed %.6f published %.4f\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.computed, c.published);
  if (!v.all_pass) {
    std::fprintf(stderr, "fixture verification FAILED\n");
    return 3;
  }
  std::printf("all %zu fixture checks passed\n", v.checks.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FMCW-radar people-counting pipeline"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "master random seed");
  app.add_option("--threads", global.threads, "worker threads (deterministic results regardless)");
  app.add_option("--config", global.config, "JSON with preprocess/rulecc sections");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic dataset");
  std::string preset = "A_chairs", out_dir;
  int per_class = 25, frames = 60;
  synth_cmd->add_option("--preset", preset, "A_empty|A_chairs|A_desks|A_whiteboard|B_complex");
  synth_cmd->add_option("--per-class", per_class, "samples per occupancy class");
  synth_cmd->add_option("--frames", frames, "frames per cube");
  synth_cmd->add_option("--out", out_dir, "output directory")->required();

  // preprocess
  auto* pre_cmd = app.add_subcommand("preprocess", "condition cubes (clip, normalize, weight)");
  std::string pre_in, pre_out, pre_manifest, pre_out_dir, pre_cfg;
  bool global_pct = false, normalized_only = false;
  pre_cmd->add_option("--in", pre_in, "single input cube");
  pre_cmd->add_option("--out", pre_out, "single output cube");
  pre_cmd->add_option("--manifest", pre_manifest, "batch mode: dataset manifest");
  pre_cmd->add_option("--out-dir", pre_out_dir, "batch mode: output directory");
  pre_cmd->add_option("--config", pre_cfg, "pipeline config JSON");
  pre_cmd->add_flag("--global-percentiles", global_pct,
                    "clip against the dataset-wide percentile band (batch mode)");
  pre_cmd->add_flag("--normalized-only", normalized_only, "stop after min-max normalization");

  // extract-features
  auto* feat_cmd = app.add_subcommand("extract-features", "18-dim feature vectors to CSV");
  std::string feat_manifest, feat_out, feat_cfg;
  bool feat_raw = false;
  feat_cmd->add_option("--manifest", feat_manifest)->required();
  feat_cmd->add_option("--out", feat_out)->required();
  feat_cmd->add_option("--config", feat_cfg, "preprocess config JSON");
  feat_cmd->add_flag("--raw", feat_raw, "skip preprocessing before extraction");

  // count
  auto* count_cmd = app.add_subcommand("count", "rule-based people count for one cube");
  std::string count_in, count_cfg, count_pre_cfg, count_std_source = "weighted";
  bool explain = false;
  count_cmd->add_option("--in", count_in)->required();
  count_cmd->add_option("--config", count_cfg, "rulecc config JSON");
  count_cmd->add_option("--preprocess-config", count_pre_cfg);
  count_cmd->add_option("--std-source", count_std_source,
                        "weighted (default) or normalized cube for the std maps");
  count_cmd->add_flag("--explain", explain, "emit per-window JSON records");

  // train
  auto* train_cmd = app.add_subcommand("train", "grid-search a baseline family");
  std::string train_family, train_features, train_out;
  train_cmd->add_option("--family", train_family, "knn|rf|svm")->required();
  train_cmd->add_option("--features", train_features)->required();
  train_cmd->add_option("--out", train_out)->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "apply a trained model to feature rows");
  std::string predict_model, predict_features, predict_out, predict_split = "test";
  predict_cmd->add_option("--model", predict_model)->required();
  predict_cmd->add_option("--features", predict_features)->required();
  predict_cmd->add_option("--out", predict_out)->required();
  predict_cmd->add_option("--split", predict_split, "row filter; empty = all rows");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score a predictions CSV");
  std::string eval_pred, eval_out;
  bool eval_two_stage = false;
  eval_cmd->add_option("--pred", eval_pred)->required();
  eval_cmd->add_option("--out", eval_out)->required();
  eval_cmd->add_flag("--two-stage-rounding", eval_two_stage,
                     "round to one decimal before rounding to integer");

  // tune
  auto* tune_cmd = app.add_subcommand("tune", "6x50 composite-score grid search");
  std::string tune_manifest, tune_out, tune_csv, tune_pre_cfg, tune_rule_cfg;
  std::string tune_std_source = "weighted", tune_split = "train";
  tune_cmd->add_option("--manifest", tune_manifest)->required();
  tune_cmd->add_option("--out", tune_out)->required();
  tune_cmd->add_option("--csv", tune_csv, "per-cell CSV for plotting");
  tune_cmd->add_option("--preprocess-config", tune_pre_cfg);
  tune_cmd->add_option("--rule-config", tune_rule_cfg, "base config for non-grid parameters");
  tune_cmd->add_option("--std-source", tune_std_source);
  tune_cmd->add_option("--split", tune_split, "manifest split to tune on");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "cross-environment evaluation protocol");
  std::string exp_train, exp_out, exp_pre_cfg, exp_rule_cfg, exp_std_source = "weighted";
  std::vector<std::string> exp_tests, exp_families;
  bool exp_features_raw = false;
  exp_cmd->add_option("--train", exp_train, "training manifest (train/val splits)")->required();
  exp_cmd->add_option("--test", exp_tests, "test manifest as name=path; first is the reference")
      ->required();
  exp_cmd->add_option("--families", exp_families, "subset of rulecc knn rf svm");
  exp_cmd->add_option("--out", exp_out)->required();
  exp_cmd->add_option("--preprocess-config", exp_pre_cfg);
  exp_cmd->add_option("--rule-config", exp_rule_cfg);
  exp_cmd->add_option("--std-source", exp_std_source);
  exp_cmd->add_flag("--features-raw", exp_features_raw);

  // verify-fixtures
  auto* verify_cmd = app.add_subcommand("verify-fixtures", "recompute published metric fixtures");
  std::string fixtures_path = "fixtures/reference_confusions.json";
  verify_cmd->add_option("--fixtures", fixtures_path, "fixtures JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(global, preset, per_class, frames, out_dir);
    if (pre_cmd->parsed())
      return cmd_preprocess(global, pre_in, pre_out, pre_manifest, pre_out_dir, pre_cfg,
                            global_pct, normalized_only);
    if (feat_cmd->parsed())
      return cmd_extract_features(global, feat_manifest, feat_out, feat_cfg, feat_raw);
    if (count_cmd->parsed())
      return cmd_count(global, count_in, count_cfg, count_pre_cfg, count_std_source, explain);
    if (train_cmd->parsed()) return cmd_train(global, train_family, train_features, train_out);
    if (predict_cmd->parsed())
      return cmd_predict(predict_model, predict_features, predict_out, predict_split);
    if (eval_cmd->parsed()) return cmd_evaluate(eval_pred, eval_out, eval_two_stage);
    if (tune_cmd->parsed())
      return cmd_tune(global, tune_manifest, tune_out, tune_csv, tune_pre_cfg, tune_rule_cfg,
                      tune_std_source, tune_split);
    if (exp_cmd->parsed())
      return cmd_experiment(global, exp_train, exp_tests, exp_families, exp_out, exp_pre_cfg,
                            exp_rule_cfg, exp_std_source, exp_features_raw);
    if (verify_cmd->parsed()) return cmd_verify_fixtures(fixtures_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

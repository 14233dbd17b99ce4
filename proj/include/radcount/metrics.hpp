// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace radcount::metrics {

/// 4x4 count matrix, C[i][j] = samples of true class i predicted as j.
struct ConfusionMatrix4 {
  std::array<std::array<long long, 4>, 4> c{};

  long long& at(int truth, int pred) { return c[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)]; }
  long long at(int truth, int pred) const { return c[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)]; }
  long long total() const;
  long long trace() const;

  std::string to_text() const;

  bool operator==(const ConfusionMatrix4&) const = default;
};

/// Composite-score weights; defaults are the tuned minority-class emphasis
/// (0.25 accuracy, 0.20 macro F1, 0.30 minority F1, 0.15 minority recall,
/// 0.10 binary presence accuracy). Must sum to 1.
struct CompositeWeights {
  double w_acc = 0.25;
  double w_f1macro = 0.20;
  double w_f1min = 0.30;
  double w_recmin = 0.15;
  double w_nonzero = 0.10;

  double sum() const { return w_acc + w_f1macro + w_f1min + w_recmin + w_nonzero; }
};

struct F1Family {
  std::array<double, 4> precision{};
  std::array<double, 4> recall{};
  std::array<double, 4> f1{};
  double f1_macro = 0.0;       // mean F1 over classes 0-3
  double f1_minority = 0.0;    // mean F1 over classes 1-3
  double recall_minority = 0.0;
};

struct EvalReport {
  double rmse = 0.0;
  double mae = 0.0;
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double f1_minority = 0.0;
  double recall_minority = 0.0;
  double r_nonzero = 0.0;  // binary presence accuracy (class 0 vs 1+)
  double composite = 0.0;
  ConfusionMatrix4 confusion;

  std::string to_json() const;
};

ConfusionMatrix4 confusion(std::span<const int> preds, std::span<const int> labels);

double accuracy(const ConfusionMatrix4& cm);

double mae(std::span<const double> preds, std::span<const double> labels);
double rmse(std::span<const double> preds, std::span<const double> labels);

/// Per-class precision/recall/F1 with 0/0 defined as 0.
F1Family f1_family(const ConfusionMatrix4& cm);

/// Presence-vs-absence accuracy: (C00 + sum_{i,j>=1} Cij) / total.
double binary_collapse(const ConfusionMatrix4& cm);

double composite_score(const EvalReport& report, const CompositeWeights& weights = {});

/// Full report: continuous predictions drive MAE/RMSE, their discretized
/// classes drive the confusion matrix and every rate.
EvalReport evaluate(std::span<const double> preds, std::span<const int> pred_classes,
                    std::span<const int> labels);

/// Report from a confusion matrix alone (no continuous error terms).
EvalReport evaluate(const ConfusionMatrix4& cm);

}  // namespace radcount::metrics

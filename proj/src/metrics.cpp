// SPDX-License-Identifier: Apache-2.0
#include "radcount/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace radcount::metrics {

long long ConfusionMatrix4::total() const {
  long long t = 0;
  for (const auto& row : c)
    for (long long x : row) t += x;
  return t;
}

long long ConfusionMatrix4::trace() const {
  long long t = 0;
  for (int i = 0; i < 4; ++i) t += at(i, i);
  return t;
}

std::string ConfusionMatrix4::to_text() const {
  std::ostringstream os;
  os << "true\\pred";
  for (int j = 0; j < 4; ++j) os << std::setw(7) << j;
  os << "\n";
  for (int i = 0; i < 4; ++i) {
    os << std::setw(9) << i;
    for (int j = 0; j < 4; ++j) os << std::setw(7) << at(i, j);
    os << "\n";
  }
  return os.str();
}

ConfusionMatrix4 confusion(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size() || preds.empty())
    throw std::invalid_argument("confusion: need equal non-empty prediction/label sequences");
  ConfusionMatrix4 cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] < 0 || labels[i] > 3 || preds[i] < 0 || preds[i] > 3)
      throw std::invalid_argument("confusion: class outside 0..3");
    ++cm.at(labels[i], preds[i]);
  }
  return cm;
}

double accuracy(const ConfusionMatrix4& cm) {
  const long long t = cm.total();
  if (t == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(t);
}

double mae(std::span<const double> preds, std::span<const double> labels) {
  if (preds.size() != labels.size() || preds.empty())
    throw std::invalid_argument("mae: need equal non-empty sequences");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - labels[i]);
  return s / static_cast<double>(preds.size());
}

double rmse(std::span<const double> preds, std::span<const double> labels) {
  if (preds.size() != labels.size() || preds.empty())
    throw std::invalid_argument("rmse: need equal non-empty sequences");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - labels[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(preds.size()));
}

F1Family f1_family(const ConfusionMatrix4& cm) {
  F1Family out;
  for (int k = 0; k < 4; ++k) {
    long long col = 0, row = 0;
    for (int i = 0; i < 4; ++i) {
      col += cm.at(i, k);
      row += cm.at(k, i);
    }
    const auto tp = static_cast<double>(cm.at(k, k));
    const double p = col > 0 ? tp / static_cast<double>(col) : 0.0;
    const double r = row > 0 ? tp / static_cast<double>(row) : 0.0;
    out.precision[static_cast<std::size_t>(k)] = p;
    out.recall[static_cast<std::size_t>(k)] = r;
    out.f1[static_cast<std::size_t>(k)] = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  for (int k = 0; k < 4; ++k) out.f1_macro += out.f1[static_cast<std::size_t>(k)] / 4.0;
  for (int k = 1; k < 4; ++k) {
    out.f1_minority += out.f1[static_cast<std::size_t>(k)] / 3.0;
    out.recall_minority += out.recall[static_cast<std::size_t>(k)] / 3.0;
  }
  return out;
}

double binary_collapse(const ConfusionMatrix4& cm) {
  const long long t = cm.total();
  if (t == 0) throw std::invalid_argument("binary_collapse: empty confusion matrix");
  long long agree = cm.at(0, 0);
  for (int i = 1; i < 4; ++i)
    for (int j = 1; j < 4; ++j) agree += cm.at(i, j);
  return static_cast<double>(agree) / static_cast<double>(t);
}

double composite_score(const EvalReport& report, const CompositeWeights& weights) {
  return weights.w_acc * report.accuracy + weights.w_f1macro * report.f1_macro +
         weights.w_f1min * report.f1_minority + weights.w_recmin * report.recall_minority +
         weights.w_nonzero * report.r_nonzero;
}

EvalReport evaluate(const ConfusionMatrix4& cm) {
  EvalReport rep;
  rep.confusion = cm;
  rep.accuracy = accuracy(cm);
  const F1Family f = f1_family(cm);
  rep.f1_macro = f.f1_macro;
  rep.f1_minority = f.f1_minority;
  rep.recall_minority = f.recall_minority;
  rep.r_nonzero = binary_collapse(cm);
  rep.composite = composite_score(rep);
  return rep;
}

EvalReport evaluate(std::span<const double> preds, std::span<const int> pred_classes,
                    std::span<const int> labels) {
  if (preds.size() != labels.size() || preds.size() != pred_classes.size() || preds.empty())
    throw std::invalid_argument("evaluate: need equal non-empty sequences");
  EvalReport rep = evaluate(confusion(pred_classes, labels));
  std::vector<double> label_reals(labels.begin(), labels.end());
  rep.mae = mae(preds, label_reals);
  rep.rmse = rmse(preds, label_reals);
  return rep;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["rmse"] = rmse;
  j["mae"] = mae;
  j["accuracy"] = accuracy;
  j["f1_macro"] = f1_macro;
  j["f1_minority"] = f1_minority;
  j["recall_minority"] = recall_minority;
  j["r_nonzero"] = r_nonzero;
  j["composite"] = composite;
  auto rows = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    auto row = nlohmann::json::array();
    for (int jj = 0; jj < 4; ++jj) row.push_back(confusion.at(i, jj));
    rows.push_back(row);
  }
  j["confusion"] = rows;
  return j.dump(2);
}

}  // namespace radcount::metrics

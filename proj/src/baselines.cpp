// SPDX-License-Identifier: Apache-2.0
//
// Standardizer, KNN, grid search, rounding, and model (de)serialization.
// The forest and SVR solvers live in rf.cpp / svr.cpp.
#include "radcount/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "radcount/metrics.hpp"
#include "radcount/stats.hpp"

namespace radcount::baselines {

Standardizer Standardizer::fit(const FeatureMatrix& features) {
  if (features.empty()) throw std::invalid_argument("Standardizer: empty training set");
  Standardizer s;
  const double n = static_cast<double>(features.size());
  for (int d = 0; d < kFeatureDim; ++d) {
    double m = 0.0;
    for (const auto& x : features) m += x[static_cast<std::size_t>(d)];
    m /= n;
    double var = 0.0;
    for (const auto& x : features) {
      const double dx = x[static_cast<std::size_t>(d)] - m;
      var += dx * dx;
    }
    s.mean[static_cast<std::size_t>(d)] = m;
    s.std[static_cast<std::size_t>(d)] = std::max(std::sqrt(var / n), 1e-12);
  }
  return s;
}

Standardizer Standardizer::identity() {
  Standardizer s;
  s.mean.fill(0.0);
  s.std.fill(1.0);
  return s;
}

FeatureVector Standardizer::transform(const FeatureVector& x) const {
  FeatureVector out;
  for (int d = 0; d < kFeatureDim; ++d)
    out[static_cast<std::size_t>(d)] =
        (x[static_cast<std::size_t>(d)] - mean[static_cast<std::size_t>(d)]) / std[static_cast<std::size_t>(d)];
  return out;
}

FeatureMatrix Standardizer::transform(const FeatureMatrix& xs) const {
  FeatureMatrix out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(transform(x));
  return out;
}

std::string to_string(KnnMetric m) {
  switch (m) {
    case KnnMetric::euclidean: return "euclidean";
    case KnnMetric::manhattan: return "manhattan";
    case KnnMetric::mahalanobis: return "mahalanobis";
  }
  throw std::invalid_argument("unknown knn metric");
}

KnnMetric knn_metric_from_string(const std::string& s) {
  if (s == "euclidean") return KnnMetric::euclidean;
  if (s == "manhattan") return KnnMetric::manhattan;
  if (s == "mahalanobis") return KnnMetric::mahalanobis;
  throw std::invalid_argument("unknown knn metric: " + s);
}

namespace {

/// Cholesky factorization of a symmetric positive-definite matrix; returns
/// the lower factor L with A = L L^T. Throws if A is not SPD.
std::vector<std::vector<double>> cholesky(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  return l;
}

std::vector<std::vector<double>> spd_inverse(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  const auto l = cholesky(a);
  // Solve L L^T X = I column by column.
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  std::vector<double> y(n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = (i == col) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * y[k];
      y[i] = s / l[i][i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= l[k][ii] * inv[k][col];
      inv[ii][col] = s / l[ii][ii];
    }
  }
  return inv;
}

std::vector<std::vector<double>> regularized_covariance(const FeatureMatrix& xs) {
  const auto n = static_cast<double>(xs.size());
  std::vector<double> mean(kFeatureDim, 0.0);
  for (const auto& x : xs)
    for (int d = 0; d < kFeatureDim; ++d) mean[static_cast<std::size_t>(d)] += x[static_cast<std::size_t>(d)];
  for (double& m : mean) m /= n;
  std::vector<std::vector<double>> cov(kFeatureDim, std::vector<double>(kFeatureDim, 0.0));
  for (const auto& x : xs)
    for (int i = 0; i < kFeatureDim; ++i)
      for (int j = 0; j <= i; ++j)
        cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            (x[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)]) *
            (x[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)]);
  double trace = 0.0;
  for (int i = 0; i < kFeatureDim; ++i) {
    for (int j = 0; j <= i; ++j) {
      cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= n;
      cov[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
          cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    trace += cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
  }
  const double lambda = std::max(1e-6 * trace / kFeatureDim, 1e-12);
  for (int i = 0; i < kFeatureDim; ++i) cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] += lambda;
  return cov;
}

double knn_distance(const KnnModel& model, const FeatureVector& a, const FeatureVector& b) {
  switch (model.metric) {
    case KnnMetric::euclidean: {
      double s = 0.0;
      for (int d = 0; d < kFeatureDim; ++d) {
        const double dx = a[static_cast<std::size_t>(d)] - b[static_cast<std::size_t>(d)];
        s += dx * dx;
      }
      return std::sqrt(s);
    }
    case KnnMetric::manhattan: {
      double s = 0.0;
      for (int d = 0; d < kFeatureDim; ++d)
        s += std::abs(a[static_cast<std::size_t>(d)] - b[static_cast<std::size_t>(d)]);
      return s;
    }
    case KnnMetric::mahalanobis: {
      FeatureVector diff;
      for (int d = 0; d < kFeatureDim; ++d)
        diff[static_cast<std::size_t>(d)] = a[static_cast<std::size_t>(d)] - b[static_cast<std::size_t>(d)];
      double s = 0.0;
      for (int i = 0; i < kFeatureDim; ++i) {
        double row = 0.0;
        for (int j = 0; j < kFeatureDim; ++j)
          row += model.inv_cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                 diff[static_cast<std::size_t>(j)];
        s += diff[static_cast<std::size_t>(i)] * row;
      }
      return std::sqrt(std::max(s, 0.0));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

KnnModel knn_fit(const FeatureMatrix& features, const std::vector<double>& labels, int k,
                 KnnMetric metric, std::optional<bool> standardize) {
  if (features.size() != labels.size())
    throw std::invalid_argument("knn_fit: feature/label count mismatch");
  if (k < 1) throw std::invalid_argument("knn_fit: k must be >= 1");
  if (static_cast<std::size_t>(k) > features.size())
    throw std::invalid_argument("knn_fit: k exceeds training-set size");

  KnnModel model;
  model.k = k;
  model.metric = metric;
  model.standardized = standardize.value_or(metric != KnnMetric::mahalanobis);
  model.scaler = model.standardized ? Standardizer::fit(features) : Standardizer::identity();
  model.train_features = model.standardized ? model.scaler.transform(features) : features;
  model.train_labels = labels;
  if (metric == KnnMetric::mahalanobis)
    model.inv_cov = spd_inverse(regularized_covariance(model.train_features));
  return model;
}

double knn_predict(const KnnModel& model, const FeatureVector& x) {
  if (model.train_features.empty()) throw std::invalid_argument("knn_predict: unfitted model");
  const FeatureVector q = model.standardized ? model.scaler.transform(x) : x;
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(model.train_features.size());
  for (std::size_t i = 0; i < model.train_features.size(); ++i)
    dist.emplace_back(knn_distance(model, model.train_features[i], q), i);
  std::sort(dist.begin(), dist.end());  // ties fall back to the index
  double s = 0.0;
  for (int i = 0; i < model.k; ++i) s += model.train_labels[dist[static_cast<std::size_t>(i)].second];
  return s / model.k;
}

std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::knn: return "knn";
    case ModelFamily::rf: return "rf";
    case ModelFamily::svm: return "svm";
  }
  throw std::invalid_argument("unknown model family");
}

ModelFamily family_from_string(const std::string& s) {
  if (s == "knn") return ModelFamily::knn;
  if (s == "rf") return ModelFamily::rf;
  if (s == "svm") return ModelFamily::svm;
  throw std::invalid_argument("unknown model family: " + s);
}

double AnyModel::predict(const FeatureVector& x) const {
  switch (family) {
    case ModelFamily::knn: return knn_predict(std::get<KnnModel>(model), x);
    case ModelFamily::rf: return rf_predict(std::get<RfModel>(model), x);
    case ModelFamily::svm: return svr_predict(std::get<SvrModel>(model), x);
  }
  throw std::logic_error("unreachable");
}

namespace {

double validation_mae(const AnyModel& model, const FeatureMatrix& val_x,
                      const std::vector<double>& val_y) {
  std::vector<double> preds(val_x.size());
  for (std::size_t i = 0; i < val_x.size(); ++i) preds[i] = model.predict(val_x[i]);
  return metrics::mae(preds, val_y);
}

}  // namespace

AnyModel grid_search_model(const FeatureMatrix& train_x, const std::vector<double>& train_y,
                           const FeatureMatrix& val_x, const std::vector<double>& val_y,
                           ModelFamily family, std::uint64_t seed, GridSearchReport* report,
                           int threads) {
  if (val_x.size() != val_y.size() || val_x.empty())
    throw std::invalid_argument("grid_search_model: invalid validation set");

  std::vector<AnyModel> candidates;
  std::vector<std::string> names;
  switch (family) {
    case ModelFamily::knn:
      for (KnnMetric metric : {KnnMetric::euclidean, KnnMetric::manhattan, KnnMetric::mahalanobis})
        for (int k : {3, 5}) {
          candidates.push_back({family, knn_fit(train_x, train_y, k, metric)});
          names.push_back("knn(metric=" + to_string(metric) + ",k=" + std::to_string(k) + ")");
        }
      break;
    case ModelFamily::rf:
      for (int n_estimators : {50, 100})
        for (int max_depth : {20, -1}) {
          RfParams p;
          p.n_estimators = n_estimators;
          p.max_depth = max_depth;
          p.seed = seed;
          candidates.push_back({family, rf_fit(train_x, train_y, p, threads)});
          names.push_back("rf(trees=" + std::to_string(n_estimators) +
                          ",depth=" + (max_depth < 0 ? std::string("none") : std::to_string(max_depth)) + ")");
        }
      break;
    case ModelFamily::svm:
      for (SvrKernel kernel : {SvrKernel::linear, SvrKernel::rbf}) {
        SvrParams p;
        p.kernel = kernel;
        candidates.push_back({family, svr_fit(train_x, train_y, p)});
        names.push_back("svm(kernel=" + to_string(kernel) + ")");
      }
      break;
  }

  int best = -1;
  double best_mae = 0.0;
  GridSearchReport local_report;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double m = validation_mae(candidates[i], val_x, val_y);
    local_report.cells.push_back({names[i], m});
    if (best < 0 || m < best_mae) {  // strict: ties keep the earlier candidate
      best = static_cast<int>(i);
      best_mae = m;
    }
  }
  local_report.best_index = best;
  if (report) *report = local_report;
  return candidates[static_cast<std::size_t>(best)];
}

int round_and_clamp(double pred) {
  const int k = static_cast<int>(std::floor(pred + 0.5));
  return std::clamp(k, 0, 3);
}

int round_and_clamp_two_stage(double pred) {
  const double decimal = std::floor(pred * 10.0 + 0.5) / 10.0;
  return round_and_clamp(decimal);
}

std::vector<int> round_and_clamp_all(const std::vector<double>& preds, bool two_stage) {
  std::vector<int> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i)
    out[i] = two_stage ? round_and_clamp_two_stage(preds[i]) : round_and_clamp(preds[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Model persistence: versioned JSON.

namespace {

nlohmann::json vec_json(const FeatureVector& v) { return nlohmann::json(std::vector<double>(v.begin(), v.end())); }

FeatureVector vec_from_json(const nlohmann::json& j) {
  const auto xs = j.get<std::vector<double>>();
  if (xs.size() != kFeatureDim) throw std::runtime_error("model file: feature vector of wrong length");
  FeatureVector out;
  std::copy(xs.begin(), xs.end(), out.begin());
  return out;
}

nlohmann::json matrix_json(const FeatureMatrix& m) {
  auto rows = nlohmann::json::array();
  for (const auto& r : m) rows.push_back(vec_json(r));
  return rows;
}

FeatureMatrix matrix_from_json(const nlohmann::json& j) {
  FeatureMatrix out;
  for (const auto& row : j) out.push_back(vec_from_json(row));
  return out;
}

nlohmann::json scaler_json(const Standardizer& s) {
  return {{"mean", vec_json(s.mean)}, {"std", vec_json(s.std)}};
}

Standardizer scaler_from_json(const nlohmann::json& j) {
  Standardizer s;
  s.mean = vec_from_json(j.at("mean"));
  s.std = vec_from_json(j.at("std"));
  return s;
}

}  // namespace

void save_model_json(const AnyModel& model, const std::string& path) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["family"] = to_string(model.family);
  switch (model.family) {
    case ModelFamily::knn: {
      const auto& m = std::get<KnnModel>(model.model);
      j["k"] = m.k;
      j["metric"] = to_string(m.metric);
      j["standardized"] = m.standardized;
      j["scaler"] = scaler_json(m.scaler);
      j["train_features"] = matrix_json(m.train_features);
      j["train_labels"] = m.train_labels;
      if (m.metric == KnnMetric::mahalanobis) j["inv_cov"] = m.inv_cov;
      break;
    }
    case ModelFamily::rf: {
      const auto& m = std::get<RfModel>(model.model);
      j["n_estimators"] = m.params.n_estimators;
      j["max_depth"] = m.params.max_depth;
      j["min_leaf"] = m.params.min_leaf;
      j["features_per_split"] = m.params.features_per_split;
      j["bootstrap"] = m.params.bootstrap;
      j["seed"] = m.params.seed;
      auto trees = nlohmann::json::array();
      for (const auto& t : m.trees) {
        auto nodes = nlohmann::json::array();
        for (const auto& n : t.nodes)
          nodes.push_back({{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right},
                           {"value", n.value}});
        trees.push_back(nodes);
      }
      j["trees"] = trees;
      break;
    }
    case ModelFamily::svm: {
      const auto& m = std::get<SvrModel>(model.model);
      j["kernel"] = to_string(m.params.kernel);
      j["C"] = m.params.C;
      j["epsilon"] = m.params.epsilon;
      j["gamma"] = m.gamma;
      j["standardized"] = m.standardized;
      j["scaler"] = scaler_json(m.scaler);
      j["support_vectors"] = matrix_json(m.support_vectors);
      j["coefficients"] = m.coefficients;
      j["bias"] = m.bias;
      j["converged"] = m.converged;
      break;
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << j.dump(2) << "\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

AnyModel load_model_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error(path + ": unsupported model format version");
  AnyModel out;
  out.family = family_from_string(j.at("family").get<std::string>());
  switch (out.family) {
    case ModelFamily::knn: {
      KnnModel m;
      m.k = j.at("k").get<int>();
      m.metric = knn_metric_from_string(j.at("metric").get<std::string>());
      m.standardized = j.at("standardized").get<bool>();
      m.scaler = scaler_from_json(j.at("scaler"));
      m.train_features = matrix_from_json(j.at("train_features"));
      m.train_labels = j.at("train_labels").get<std::vector<double>>();
      if (m.metric == KnnMetric::mahalanobis)
        m.inv_cov = j.at("inv_cov").get<std::vector<std::vector<double>>>();
      out.model = std::move(m);
      break;
    }
    case ModelFamily::rf: {
      RfModel m;
      m.params.n_estimators = j.at("n_estimators").get<int>();
      m.params.max_depth = j.at("max_depth").get<int>();
      m.params.min_leaf = j.at("min_leaf").get<int>();
      m.params.features_per_split = j.at("features_per_split").get<int>();
      m.params.bootstrap = j.at("bootstrap").get<bool>();
      m.params.seed = j.at("seed").get<std::uint64_t>();
      for (const auto& tj : j.at("trees")) {
        RegressionTree t;
        for (const auto& nj : tj) {
          TreeNode n;
          n.feature = nj.at("feature").get<int>();
          n.threshold = nj.at("threshold").get<double>();
          n.left = nj.at("left").get<int>();
          n.right = nj.at("right").get<int>();
          n.value = nj.at("value").get<double>();
          t.nodes.push_back(n);
        }
        m.trees.push_back(std::move(t));
      }
      out.model = std::move(m);
      break;
    }
    case ModelFamily::svm: {
      SvrModel m;
      m.params.kernel = svr_kernel_from_string(j.at("kernel").get<std::string>());
      m.params.C = j.at("C").get<double>();
      m.params.epsilon = j.at("epsilon").get<double>();
      m.gamma = j.at("gamma").get<double>();
      m.standardized = j.at("standardized").get<bool>();
      m.scaler = scaler_from_json(j.at("scaler"));
      m.support_vectors = matrix_from_json(j.at("support_vectors"));
      m.coefficients = j.at("coefficients").get<std::vector<double>>();
      m.bias = j.at("bias").get<double>();
      m.converged = j.at("converged").get<bool>();
      out.model = std::move(m);
      break;
    }
  }
  return out;
}

}  // namespace radcount::baselines

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "radcount/features.hpp"

namespace radcount::baselines {

using features::FeatureVector;
using features::kFeatureDim;
using FeatureMatrix = std::vector<FeatureVector>;

/// Per-feature train-split mean/std; stds floored at 1e-12.
struct Standardizer {
  FeatureVector mean{};
  FeatureVector std{};

  static Standardizer fit(const FeatureMatrix& features);
  static Standardizer identity();
  FeatureVector transform(const FeatureVector& x) const;
  FeatureMatrix transform(const FeatureMatrix& xs) const;
};

enum class KnnMetric { euclidean, manhattan, mahalanobis };

std::string to_string(KnnMetric m);
KnnMetric knn_metric_from_string(const std::string& s);

struct KnnModel {
  int k = 3;
  KnnMetric metric = KnnMetric::euclidean;
  bool standardized = false;
  Standardizer scaler;
  FeatureMatrix train_features;  // post-standardization when standardized
  std::vector<double> train_labels;
  std::vector<std::vector<double>> inv_cov;  // 18x18, mahalanobis only
};

/// Stores the training set; for mahalanobis also inverts the ridge-
/// regularized covariance (lambda = 1e-6 * trace(Sigma)/18). Euclidean and
/// manhattan standardize by default, mahalanobis and RF consume raw scales;
/// `standardize` overrides.
KnnModel knn_fit(const FeatureMatrix& features, const std::vector<double>& labels, int k,
                 KnnMetric metric, std::optional<bool> standardize = std::nullopt);

/// Mean label of the k nearest training points; distance ties break toward
/// the lower training index.
double knn_predict(const KnnModel& model, const FeatureVector& x);

struct RfParams {
  int n_estimators = 100;
  int max_depth = -1;  // -1 = unlimited
  int min_leaf = 1;
  int features_per_split = 6;  // ceil(18/3)
  bool bootstrap = true;       // test hook: false trains every tree on the full set
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double predict(const FeatureVector& x) const;
};

struct RfModel {
  RfParams params;
  std::vector<RegressionTree> trees;
};

/// Bootstrap-aggregated variance-reduction trees; per-tree RNG streams are
/// derived from the seed so refits are bitwise identical.
RfModel rf_fit(const FeatureMatrix& features, const std::vector<double>& labels,
               const RfParams& params, int threads = 1);

double rf_predict(const RfModel& model, const FeatureVector& x);

enum class SvrKernel { linear, rbf };

std::string to_string(SvrKernel k);
SvrKernel svr_kernel_from_string(const std::string& s);

struct SvrParams {
  SvrKernel kernel = SvrKernel::rbf;
  double C = 1.0;
  double epsilon = 0.1;
  std::optional<double> gamma;  // rbf; default 1/(18 * mean feature variance)
  double tol = 1e-3;            // max admissible KKT violation
  long max_iter = 500000;
};

struct SvrModel {
  SvrParams params;
  bool standardized = true;
  Standardizer scaler;
  double gamma = 0.0;  // resolved value
  FeatureMatrix support_vectors;
  std::vector<double> coefficients;  // alpha_i - alpha*_i per support vector
  double bias = 0.0;
  bool converged = false;
  double kkt_violation = 0.0;
  long iterations = 0;
};

/// Epsilon-insensitive SVR solved in the dual by pairwise coordinate steps
/// on the maximal violating pair until the KKT gap drops below tol.
/// Non-convergence is flagged on the model and warned to stderr.
SvrModel svr_fit(const FeatureMatrix& features, const std::vector<double>& labels,
                 const SvrParams& params, std::optional<bool> standardize = std::nullopt);

double svr_predict(const SvrModel& model, const FeatureVector& x);

enum class ModelFamily { knn, rf, svm };

std::string to_string(ModelFamily f);
ModelFamily family_from_string(const std::string& s);

struct AnyModel {
  ModelFamily family = ModelFamily::knn;
  std::variant<KnnModel, RfModel, SvrModel> model;

  double predict(const FeatureVector& x) const;
};

struct GridSearchReport {
  struct Cell {
    std::string candidate;
    double val_mae = 0.0;
  };
  std::vector<Cell> cells;
  int best_index = -1;
};

/// Exhaustive family grid (KNN: 3 metrics x k in {3,5}; RF: trees in
/// {50,100} x depth in {20, unlimited}; SVM: {linear, rbf}) scored by
/// validation MAE; ties keep the first candidate in enumeration order.
AnyModel grid_search_model(const FeatureMatrix& train_x, const std::vector<double>& train_y,
                           const FeatureMatrix& val_x, const std::vector<double>& val_y,
                           ModelFamily family, std::uint64_t seed, GridSearchReport* report = nullptr,
                           int threads = 1);

/// Round half up, then clamp into {0,1,2,3}.
int round_and_clamp(double pred);

/// Two-stage variant: round to one decimal first, then to integer
/// (1.45 -> 1.5 -> 2).
int round_and_clamp_two_stage(double pred);

std::vector<int> round_and_clamp_all(const std::vector<double>& preds, bool two_stage = false);

void save_model_json(const AnyModel& model, const std::string& path);
AnyModel load_model_json(const std::string& path);

}  // namespace radcount::baselines

// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "radcount/baselines.hpp"
#include "radcount/parallel.hpp"
#include "radcount/rng.hpp"

namespace radcount::baselines {

namespace {

struct TreeBuilder {
  const FeatureMatrix& x;
  const std::vector<double>& y;
  const RfParams& params;
  Rng& rng;
  RegressionTree tree;

  double node_mean(const std::vector<int>& idx) const {
    double s = 0.0;
    for (int i : idx) s += y[static_cast<std::size_t>(i)];
    return s / static_cast<double>(idx.size());
  }

  /// Best variance-reducing split over a random subset of candidate
  /// features. If none of the sampled features separates the node, the
  /// search widens to the remaining features before giving up, so nodes of
  /// distinct rows always split.
  bool best_split(const std::vector<int>& idx, int& out_feature, double& out_threshold) const {
    // Sample distinct candidate features (partial Fisher-Yates).
    std::vector<int> feats(kFeatureDim);
    std::iota(feats.begin(), feats.end(), 0);
    const int n_candidates = std::min(params.features_per_split, kFeatureDim);
    for (int i = 0; i < n_candidates; ++i) {
      const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(kFeatureDim - i)));
      std::swap(feats[static_cast<std::size_t>(i)], feats[static_cast<std::size_t>(j)]);
    }

    double best_sse = std::numeric_limits<double>::infinity();
    bool found = false;
    std::vector<std::pair<double, double>> vals;  // (feature value, label)
    for (int fi = 0; fi < kFeatureDim; ++fi) {
      if (fi >= n_candidates && found) break;
      const int f = feats[static_cast<std::size_t>(fi)];
      vals.clear();
      for (int i : idx)
        vals.emplace_back(x[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)],
                          y[static_cast<std::size_t>(i)]);
      std::sort(vals.begin(), vals.end());

      // Prefix sums let each cut cost O(1): SSE = sum y^2 - (sum y)^2 / n.
      const std::size_t n = vals.size();
      double left_sum = 0.0, left_sq = 0.0;
      double total_sum = 0.0, total_sq = 0.0;
      for (const auto& [v, label] : vals) {
        total_sum += label;
        total_sq += label * label;
      }
      for (std::size_t cut = 1; cut < n; ++cut) {
        left_sum += vals[cut - 1].second;
        left_sq += vals[cut - 1].second * vals[cut - 1].second;
        if (vals[cut].first == vals[cut - 1].first) continue;  // no separating threshold
        if (static_cast<int>(cut) < params.min_leaf || static_cast<int>(n - cut) < params.min_leaf)
          continue;
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / static_cast<double>(cut)) +
                           (right_sq - right_sum * right_sum / static_cast<double>(n - cut));
        if (sse < best_sse) {
          best_sse = sse;
          out_feature = f;
          out_threshold = 0.5 * (vals[cut - 1].first + vals[cut].first);
          found = true;
        }
      }
    }
    return found;
  }

  int build(const std::vector<int>& idx, int depth) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(node_id)].value = node_mean(idx);

    const bool depth_capped = params.max_depth >= 0 && depth >= params.max_depth;
    bool pure = true;
    for (std::size_t i = 1; i < idx.size(); ++i)
      if (y[static_cast<std::size_t>(idx[i])] != y[static_cast<std::size_t>(idx[0])]) {
        pure = false;
        break;
      }
    if (idx.size() < 2 || depth_capped || pure) return node_id;

    int feature = -1;
    double threshold = 0.0;
    if (!best_split(idx, feature, threshold)) return node_id;

    std::vector<int> left_idx, right_idx;
    for (int i : idx)
      (x[static_cast<std::size_t>(i)][static_cast<std::size_t>(feature)] <= threshold ? left_idx
                                                                                      : right_idx)
          .push_back(i);
    const int left = build(left_idx, depth + 1);
    const int right = build(right_idx, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.feature = feature;
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    return node_id;
  }
};

}  // namespace

double RegressionTree::predict(const FeatureVector& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

RfModel rf_fit(const FeatureMatrix& features, const std::vector<double>& labels,
               const RfParams& params, int threads) {
  if (features.size() != labels.size())
    throw std::invalid_argument("rf_fit: feature/label count mismatch");
  if (features.size() < 2) throw std::invalid_argument("rf_fit: need at least 2 samples");
  if (params.n_estimators < 1) throw std::invalid_argument("rf_fit: need at least 1 tree");

  RfModel model;
  model.params = params;
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));
  const std::size_t n = features.size();
  parallel_for(model.trees.size(), threads, [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
    std::vector<int> idx(n);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i)
        idx[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    TreeBuilder builder{features, labels, params, rng, {}};
    builder.build(idx, 0);
    model.trees[t] = std::move(builder.tree);
  });
  return model;
}

double rf_predict(const RfModel& model, const FeatureVector& x) {
  if (model.trees.empty()) throw std::invalid_argument("rf_predict: unfitted model");
  double s = 0.0;
  for (const auto& t : model.trees) s += t.predict(x);
  return s / static_cast<double>(model.trees.size());
}

}  // namespace radcount::baselines

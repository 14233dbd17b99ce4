// SPDX-License-Identifier: Apache-2.0
//
// Epsilon-insensitive support-vector regression in the dual. The 2n box
// variables (alpha_i, alpha*_i) are optimized pairwise on the maximal
// violating pair until the KKT gap m - M falls below tol, with the full
// gradient kept incrementally.
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "radcount/baselines.hpp"

namespace radcount::baselines {

std::string to_string(SvrKernel k) {
  switch (k) {
    case SvrKernel::linear: return "linear";
    case SvrKernel::rbf: return "rbf";
  }
  throw std::invalid_argument("unknown svr kernel");
}

SvrKernel svr_kernel_from_string(const std::string& s) {
  if (s == "linear") return SvrKernel::linear;
  if (s == "rbf") return SvrKernel::rbf;
  throw std::invalid_argument("unknown svr kernel: " + s);
}

namespace {

double kernel_eval(SvrKernel kernel, double gamma, const FeatureVector& a, const FeatureVector& b) {
  switch (kernel) {
    case SvrKernel::linear: {
      double s = 0.0;
      for (int d = 0; d < kFeatureDim; ++d)
        s += a[static_cast<std::size_t>(d)] * b[static_cast<std::size_t>(d)];
      return s;
    }
    case SvrKernel::rbf: {
      double s = 0.0;
      for (int d = 0; d < kFeatureDim; ++d) {
        const double dx = a[static_cast<std::size_t>(d)] - b[static_cast<std::size_t>(d)];
        s += dx * dx;
      }
      return std::exp(-gamma * s);
    }
  }
  throw std::logic_error("unreachable");
}

double resolve_gamma(const SvrParams& params, const FeatureMatrix& xs) {
  if (params.gamma) return *params.gamma;
  double var_sum = 0.0;
  const double n = static_cast<double>(xs.size());
  for (int d = 0; d < kFeatureDim; ++d) {
    double m = 0.0;
    for (const auto& x : xs) m += x[static_cast<std::size_t>(d)];
    m /= n;
    double v = 0.0;
    for (const auto& x : xs) {
      const double dx = x[static_cast<std::size_t>(d)] - m;
      v += dx * dx;
    }
    var_sum += v / n;
  }
  const double mean_var = var_sum / kFeatureDim;
  return 1.0 / (kFeatureDim * std::max(mean_var, 1e-12));
}

}  // namespace

SvrModel svr_fit(const FeatureMatrix& features, const std::vector<double>& labels,
                 const SvrParams& params, std::optional<bool> standardize) {
  if (features.size() != labels.size())
    throw std::invalid_argument("svr_fit: feature/label count mismatch");
  const std::size_t n = features.size();
  if (n < 2) throw std::invalid_argument("svr_fit: need at least 2 samples");
  if (!(params.C > 0.0) || !(params.epsilon >= 0.0) || !(params.tol > 0.0))
    throw std::invalid_argument("svr_fit: C > 0, epsilon >= 0, tol > 0 required");

  SvrModel model;
  model.params = params;
  model.standardized = standardize.value_or(true);
  model.scaler = model.standardized ? Standardizer::fit(features) : Standardizer::identity();
  const FeatureMatrix xs = model.standardized ? model.scaler.transform(features) : features;
  model.gamma = resolve_gamma(params, xs);

  std::vector<double> kmat(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double k = kernel_eval(params.kernel, model.gamma, xs[i], xs[j]);
      kmat[i * n + j] = k;
      kmat[j * n + i] = k;
    }
  const auto kat = [&](std::size_t i, std::size_t j) { return kmat[i * n + j]; };

  // Variables p in [0, 2n): p < n is alpha_p (sign +1), p >= n is
  // alpha*_{p-n} (sign -1). Objective gradient starts at the linear term.
  const std::size_t m2 = 2 * n;
  std::vector<double> v(m2, 0.0);
  std::vector<double> grad(m2);
  for (std::size_t i = 0; i < n; ++i) {
    grad[i] = params.epsilon - labels[i];
    grad[n + i] = params.epsilon + labels[i];
  }
  const auto sign_of = [n](std::size_t p) { return p < n ? 1.0 : -1.0; };
  const double C = params.C;

  double gap = std::numeric_limits<double>::infinity();
  double b_up = 0.0, b_low = 0.0;
  long iter = 0;
  for (; iter < params.max_iter; ++iter) {
    // Maximal violating pair over -z*grad.
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    std::size_t i_up = m2, i_low = m2;
    for (std::size_t p = 0; p < m2; ++p) {
      const double z = sign_of(p);
      const double score = -z * grad[p];
      const bool can_up = (z > 0.0) ? v[p] < C : v[p] > 0.0;
      const bool can_down = (z > 0.0) ? v[p] > 0.0 : v[p] < C;
      if (can_up && score > m_up) {
        m_up = score;
        i_up = p;
      }
      if (can_down && score < m_low) {
        m_low = score;
        i_low = p;
      }
    }
    gap = m_up - m_low;
    b_up = m_up;
    b_low = m_low;
    if (i_up >= m2 || i_low >= m2 || gap <= params.tol) break;

    const std::size_t i = i_up, j = i_low;
    const std::size_t ri = i % n, rj = j % n;
    const double zi = sign_of(i), zj = sign_of(j);
    const double s = zi * zj;
    const double eta = std::max(kat(ri, ri) + kat(rj, rj) - 2.0 * kat(ri, rj), 1e-12);

    // Unconstrained step along the pair direction, then box clipping.
    double t = (s * grad[j] - grad[i]) / eta;
    double t_lo = -v[i];
    double t_hi = C - v[i];
    if (s > 0.0) {  // v_j moves by -t
      t_lo = std::max(t_lo, v[j] - C);
      t_hi = std::min(t_hi, v[j]);
    } else {  // v_j moves by +t
      t_lo = std::max(t_lo, -v[j]);
      t_hi = std::min(t_hi, C - v[j]);
    }
    t = std::clamp(t, t_lo, t_hi);
    if (t == 0.0) break;  // numerically stuck; gap is reported as-is

    v[i] += t;
    v[j] -= s * t;
    for (std::size_t p = 0; p < m2; ++p) {
      const double zp = sign_of(p);
      grad[p] += zp * kat(p % n, ri) * zi * t - zp * kat(p % n, rj) * zj * s * t;
    }
  }

  model.iterations = iter;
  model.kkt_violation = std::max(gap, 0.0);
  model.converged = gap <= params.tol;
  model.bias = 0.5 * (b_up + b_low);
  if (!model.converged)
    std::cerr << "svr_fit: no convergence after " << iter << " iterations (KKT gap " << gap
              << ")\n";

  for (std::size_t i = 0; i < n; ++i) {
    const double beta = v[i] - v[n + i];
    if (beta != 0.0) {
      model.support_vectors.push_back(xs[i]);
      model.coefficients.push_back(beta);
    }
  }
  return model;
}

double svr_predict(const SvrModel& model, const FeatureVector& x) {
  const FeatureVector q = model.standardized ? model.scaler.transform(x) : x;
  double s = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    s += model.coefficients[i] *
         kernel_eval(model.params.kernel, model.gamma, model.support_vectors[i], q);
  return s;
}

}  // namespace radcount::baselines

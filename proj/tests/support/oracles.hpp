#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include "fuelml/dataset.hpp"
#include "fuelml/mlp.hpp"

namespace fuelml::testing {

struct BruteSplit {
  std::size_t feature;
  double threshold;
};

inline double sse(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

// Every feature x every midpoint of consecutive distinct values; largest SSE
// reduction wins, near-ties resolved to the lower feature then lower threshold.
inline std::optional<BruteSplit> brute_force_root(const Dataset& d, std::size_t min_leaf = 1) {
  const double parent = sse(d.target);
  const double tol = 1e-9 * std::max(parent, 1e-300);
  std::optional<BruteSplit> best;
  double best_gain = 0.0;
  for (std::size_t j = 0; j < d.p(); ++j) {
    auto col = d.features.column(j);
    std::sort(col.begin(), col.end());
    col.erase(std::unique(col.begin(), col.end()), col.end());
    for (std::size_t k = 0; k + 1 < col.size(); ++k) {
      const double t = (col[k] + col[k + 1]) / 2.0;
      std::vector<double> l, r;
      for (std::size_t i = 0; i < d.n(); ++i) (d.features(i, j) <= t ? l : r).push_back(d.target[i]);
      if (l.size() < min_leaf || r.size() < min_leaf) continue;
      const double gain = parent - sse(l) - sse(r);
      if (gain <= tol) continue;
      if (!best || gain > best_gain + tol) {
        best = BruteSplit{j, t};
        best_gain = gain;
      }
    }
  }
  return best;
}

// Acklam's rational approximation refined by one Halley step against erfc.
inline double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p > 1 - 0.02425) {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }
  for (int i = 0; i < 2; ++i) {
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
    x = x - u / (1 + x * u / 2);
  }
  return x;
}

// Mean squared error on the scaled target, written out directly.
inline double oracle_loss(const MlpModel& m, const Matrix& rows, const std::vector<double>& targets) {
  double s = 0.0;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    double out = m.b2;
    for (std::size_t k = 0; k < m.n_hidden; ++k) {
      double a = m.b1[k];
      for (std::size_t j = 0; j < m.n_inputs; ++j)
        a += m.w1[k * m.n_inputs + j] * (rows(i, j) - m.input_scaling.means[j]) / m.input_scaling.scales[j];
      out += m.w2[k] * (m.activation == Activation::sigmoid ? 1.0 / (1.0 + std::exp(-a)) : std::tanh(a));
    }
    const double e = out - (targets[i] - m.target_mean) / m.target_scale;
    s += e * e;
  }
  return s / static_cast<double>(rows.rows());
}

inline std::vector<double*> parameters(MlpModel& m) {
  std::vector<double*> out;
  for (auto& w : m.w1) out.push_back(&w);
  for (auto& b : m.b1) out.push_back(&b);
  for (auto& w : m.w2) out.push_back(&w);
  out.push_back(&m.b2);
  return out;
}

inline std::vector<double> flatten(const MlpGradient& g) {
  std::vector<double> out = g.w1;
  out.insert(out.end(), g.b1.begin(), g.b1.end());
  out.insert(out.end(), g.w2.begin(), g.w2.end());
  out.push_back(g.b2);
  return out;
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

inline double max_fd_error(MlpModel m, const Matrix& rows, const std::vector<double>& targets) {
  const auto analytic = flatten(mlp_gradient(m, rows, targets));
  const auto params = parameters(m);
  if (params.size() != analytic.size()) return INFINITY;
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t q = 0; q < params.size(); ++q) {
    const double saved = *params[q];
    *params[q] = saved + h;
    const double up = oracle_loss(m, rows, targets);
    *params[q] = saved - h;
    const double down = oracle_loss(m, rows, targets);
    *params[q] = saved;
    worst = std::max(worst, relative_error(analytic[q], (up - down) / (2 * h)));
  }
  return worst;
}

}  // namespace fuelml::testing

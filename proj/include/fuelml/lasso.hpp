#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "fuelml/dataset.hpp"

namespace fuelml {

struct LassoConfig {
  double lambda = 0.0;
  double tol = 1e-7;  // max coefficient change per sweep
  std::size_t max_sweeps = 100000;
  bool standardize_inputs = true;

  void validate() const;

  friend bool operator==(const LassoConfig&, const LassoConfig&) = default;
};

/// Coefficients live on the scaled input space: prediction is
/// intercept + sum_j coefficients[j] * (x_j - means[j]) / scales[j].
/// Without input standardization the scaling is the identity.
struct LassoModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double lambda = 0.0;
  ScalingParams scaling;
  std::size_t sweeps_run = 0;
  bool converged = false;
  /// Penalized objective before the first sweep and after each sweep.
  /// Not serialized.
  std::vector<double> objective_trace;
};

/// sign(z) * max(|z| - gamma, 0)
double soft_threshold(double z, double gamma);

/// Smallest lambda giving an all-zero solution:
/// max_j |(1/n) sum_i x_ij (y_i - mean(y))| on the (optionally standardized)
/// inputs.
double lasso_lambda_max(const Dataset& data, bool standardize_inputs = true);

/// Cyclic coordinate descent on (1/(2n)) ||y - b0 - X b||^2 + lambda ||b||_1.
/// Updates use the covariance form: the Gram matrix and X^T y are formed once
/// and each coordinate step costs O(p).
LassoModel fit_lasso(const Dataset& data, const LassoConfig& config);

double predict_lasso(const LassoModel& model, std::span<const double> row);

void to_json(nlohmann::json& j, const LassoConfig& c);
void from_json(const nlohmann::json& j, LassoConfig& c);
void to_json(nlohmann::json& j, const LassoModel& m);
void from_json(const nlohmann::json& j, LassoModel& m);

}  // namespace fuelml

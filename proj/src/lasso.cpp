#include "fuelml/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fuelml {

void LassoConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

namespace {

ScalingParams identity_scaling(std::size_t p) {
  return {std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)};
}

// Centered second moments of the scaled design: gram = (1/n) Zc^T Zc,
// xty = (1/n) Zc^T yc, yy = (1/n) yc^T yc.
struct Moments {
  std::vector<double> column_means;  // of the scaled design
  double y_mean = 0.0;
  std::vector<double> gram;  // p x p row-major
  std::vector<double> xty;
  double yy = 0.0;
};

Moments centered_moments(const Matrix& z, std::span<const double> y) {
  const std::size_t n = z.rows(), p = z.cols();
  const auto nd = static_cast<double>(n);
  Moments m;
  m.column_means.assign(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) m.column_means[j] += z(i, j);
  for (auto& v : m.column_means) v /= nd;
  for (double v : y) m.y_mean += v;
  m.y_mean /= nd;

  m.gram.assign(p * p, 0.0);
  m.xty.assign(p, 0.0);
  std::vector<double> zc(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) zc[j] = z(i, j) - m.column_means[j];
    const double yc = y[i] - m.y_mean;
    m.yy += yc * yc;
    for (std::size_t j = 0; j < p; ++j) {
      m.xty[j] += zc[j] * yc;
      for (std::size_t k = j; k < p; ++k) m.gram[j * p + k] += zc[j] * zc[k];
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    m.xty[j] /= nd;
    for (std::size_t k = j; k < p; ++k) {
      m.gram[j * p + k] /= nd;
      m.gram[k * p + j] = m.gram[j * p + k];
    }
  }
  m.yy /= nd;
  return m;
}

double objective(const Moments& m, std::span<const double> beta, double lambda) {
  const std::size_t p = beta.size();
  double quad = 0.0, lin = 0.0, l1 = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    if (beta[j] == 0.0) continue;
    lin += m.xty[j] * beta[j];
    l1 += std::abs(beta[j]);
    for (std::size_t k = 0; k < p; ++k) quad += beta[j] * m.gram[j * p + k] * beta[k];
  }
  return 0.5 * (m.yy - 2.0 * lin + quad) + lambda * l1;
}

void check_data(const Dataset& data) {
  if (data.n() < 2) throw std::invalid_argument("lasso needs at least 2 rows");
  data.validate();
}

}  // namespace

double lasso_lambda_max(const Dataset& data, bool standardize_inputs) {
  check_data(data);
  const ScalingParams scaling = standardize_inputs ? fit_scaling(data.features) : identity_scaling(data.p());
  const Moments m = centered_moments(scaling.apply(data.features), data.target);
  double best = 0.0;
  for (double v : m.xty) best = std::max(best, std::abs(v));
  return best;
}

LassoModel fit_lasso(const Dataset& data, const LassoConfig& config) {
  config.validate();
  check_data(data);
  const std::size_t p = data.p();

  LassoModel model;
  model.lambda = config.lambda;
  model.scaling = config.standardize_inputs ? fit_scaling(data.features) : identity_scaling(p);
  const Moments m = centered_moments(model.scaling.apply(data.features), data.target);

  std::vector<double> beta(p, 0.0);
  auto intercept_for = [&] {
    double b0 = m.y_mean;
    for (std::size_t j = 0; j < p; ++j) b0 -= m.column_means[j] * beta[j];
    return b0;
  };

  double intercept = intercept_for();
  model.objective_trace.push_back(objective(m, beta, config.lambda));
  for (std::size_t sweep = 0; sweep < config.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double z = m.gram[j * p + j];
      if (!(z > 0.0)) continue;  // constant column: coefficient pinned at 0
      double rho = m.xty[j];
      for (std::size_t k = 0; k < p; ++k)
        if (k != j) rho -= m.gram[j * p + k] * beta[k];
      const double updated = soft_threshold(rho, config.lambda) / z;
      max_delta = std::max(max_delta, std::abs(updated - beta[j]));
      beta[j] = updated;
    }
    const double new_intercept = intercept_for();
    max_delta = std::max(max_delta, std::abs(new_intercept - intercept));
    intercept = new_intercept;
    model.objective_trace.push_back(objective(m, beta, config.lambda));
    model.sweeps_run = sweep + 1;
    if (max_delta <= config.tol) {
      model.converged = true;
      break;
    }
  }
  model.intercept = intercept;
  model.coefficients = std::move(beta);
  return model;
}

double predict_lasso(const LassoModel& model, std::span<const double> row) {
  if (row.size() != model.coefficients.size())
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " values, model expects " +
                                std::to_string(model.coefficients.size()));
  double out = model.intercept;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (model.coefficients[j] == 0.0) continue;
    out += model.coefficients[j] * (row[j] - model.scaling.means[j]) / model.scaling.scales[j];
  }
  return out;
}

void to_json(nlohmann::json& j, const LassoConfig& c) {
  j = {{"lambda", c.lambda},
       {"tol", c.tol},
       {"max_sweeps", c.max_sweeps},
       {"standardize_inputs", c.standardize_inputs}};
}

void from_json(const nlohmann::json& j, LassoConfig& c) {
  j.at("lambda").get_to(c.lambda);
  j.at("tol").get_to(c.tol);
  j.at("max_sweeps").get_to(c.max_sweeps);
  j.at("standardize_inputs").get_to(c.standardize_inputs);
}

void to_json(nlohmann::json& j, const LassoModel& m) {
  j = {{"intercept", m.intercept},   {"coefficients", m.coefficients}, {"lambda", m.lambda},
       {"scaling", m.scaling},       {"sweeps_run", m.sweeps_run},     {"converged", m.converged}};
}

void from_json(const nlohmann::json& j, LassoModel& m) {
  j.at("intercept").get_to(m.intercept);
  j.at("coefficients").get_to(m.coefficients);
  j.at("lambda").get_to(m.lambda);
  j.at("scaling").get_to(m.scaling);
  m.sweeps_run = j.value("sweeps_run", std::size_t{0});
  m.converged = j.value("converged", false);
  m.objective_trace.clear();
  if (m.scaling.means.size() != m.coefficients.size())
    throw std::invalid_argument("lasso: scaling width does not match coefficients");
}

}  // namespace fuelml

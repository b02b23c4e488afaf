#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fuelml {

/// Paired observed / estimated target values.
struct PredictionSet {
  std::vector<double> observed;
  std::vector<double> estimated;

  /// Equal, non-zero lengths and finite entries.
  void validate() const;
};

// All metrics use N denominators. nse and rsr throw std::domain_error when the
// observations have zero variance.
double nse(const PredictionSet& ps);
double bias(const PredictionSet& ps);  // mean(OBS - EST)
double mae(const PredictionSet& ps);
double rmse(const PredictionSet& ps);
double rsr(const PredictionSet& ps);

/// nse, rsr and r2 are empty when the observations have zero variance.
/// r2 is the same quantity as nse.
struct MetricsReport {
  std::optional<double> nse;
  double bias = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> rsr;
  std::optional<double> r2;
};

MetricsReport metrics_report(const PredictionSet& ps);

struct ResidualRow {
  double observed = 0.0;
  double predicted = 0.0;
  double residual = 0.0;  // observed - predicted
};

std::vector<ResidualRow> residual_table(const PredictionSet& ps);

/// `observed,predicted,residual` CSV, optionally preceded by a '#' comment.
std::string residual_csv(const std::vector<ResidualRow>& rows, const std::string& comment = {});

void to_json(nlohmann::json& j, const MetricsReport& m);

}  // namespace fuelml

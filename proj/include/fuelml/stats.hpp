#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <json.hpp>

namespace fuelml {

/// Population-moment summary of one column. Skewness (g1) and excess
/// kurtosis (g2) are empty when the sample has zero variance.
struct DescriptiveStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
  std::optional<double> skewness;
  std::optional<double> excess_kurtosis;
};

/// Quartiles use linear interpolation between order statistics.
DescriptiveStats describe(std::span<const double> values);

/// Squared correlation between the sorted sample and standard-normal
/// quantiles at plotting positions (k - 0.5) / n.
double normality_r2(std::span<const double> values);

void to_json(nlohmann::json& j, const DescriptiveStats& s);

}  // namespace fuelml

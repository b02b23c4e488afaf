#include "fuelml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>

namespace fuelml {

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void require_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in sample");
}

}  // namespace

DescriptiveStats describe(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("describe needs at least 2 values");
  require_finite(values);

  DescriptiveStats s;
  s.count = values.size();
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.std = std::sqrt(m2);
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.q25 = interpolated_quantile(sorted, 0.25);
  s.median = interpolated_quantile(sorted, 0.5);
  s.q75 = interpolated_quantile(sorted, 0.75);
  return s;
}

double normality_r2(std::span<const double> values) {
  if (values.size() < 3) throw std::invalid_argument("normality_r2 needs at least 3 values");
  require_finite(values);

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const boost::math::normal_distribution<double> std_normal;
  std::vector<double> theoretical(n);
  for (std::size_t k = 0; k < n; ++k)
    theoretical[k] = boost::math::quantile(std_normal, (static_cast<double>(k) + 0.5) / static_cast<double>(n));

  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += theoretical[k];
    my += sorted[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = theoretical[k] - mx;
    const double dy = sorted[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(syy > 0.0)) throw std::invalid_argument("normality_r2: sample has zero variance");
  return std::clamp((sxy * sxy) / (sxx * syy), 0.0, 1.0);
}

void to_json(nlohmann::json& j, const DescriptiveStats& s) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j = {{"count", s.count},   {"mean", s.mean},     {"std", s.std},
       {"min", s.min},       {"q25", s.q25},       {"median", s.median},
       {"q75", s.q75},       {"max", s.max},       {"skewness", opt(s.skewness)},
       {"excess_kurtosis", opt(s.excess_kurtosis)}};
}

}  // namespace fuelml

#include "fuelml/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fuelml/dataset.hpp"

namespace fuelml {

void PredictionSet::validate() const {
  if (observed.size() != estimated.size()) throw std::invalid_argument("observed/estimated length mismatch");
  if (observed.empty()) throw std::invalid_argument("empty prediction set");
  for (std::size_t k = 0; k < observed.size(); ++k)
    if (!std::isfinite(observed[k]) || !std::isfinite(estimated[k]))
      throw std::invalid_argument("non-finite value in prediction set");
}

namespace {

struct Sums {
  double sse = 0.0;  // sum (EST - OBS)^2
  double sst = 0.0;  // sum (OBS - mean OBS)^2
  double signed_err = 0.0;
  double abs_err = 0.0;
  double n = 0.0;
};

Sums accumulate(const PredictionSet& ps) {
  ps.validate();
  Sums s;
  s.n = static_cast<double>(ps.observed.size());
  double mean = 0.0;
  for (double o : ps.observed) mean += o;
  mean /= s.n;
  for (std::size_t k = 0; k < ps.observed.size(); ++k) {
    const double err = ps.observed[k] - ps.estimated[k];
    const double dev = ps.observed[k] - mean;
    s.sse += err * err;
    s.sst += dev * dev;
    s.signed_err += err;
    s.abs_err += std::abs(err);
  }
  return s;
}

void require_variance(const Sums& s) {
  if (!(s.sst > 0.0)) throw std::domain_error("observed values have zero variance");
}

}  // namespace

double nse(const PredictionSet& ps) {
  const Sums s = accumulate(ps);
  require_variance(s);
  return 1.0 - s.sse / s.sst;
}

double bias(const PredictionSet& ps) { const Sums s = accumulate(ps); return s.signed_err / s.n; }

double mae(const PredictionSet& ps) { const Sums s = accumulate(ps); return s.abs_err / s.n; }

double rmse(const PredictionSet& ps) { const Sums s = accumulate(ps); return std::sqrt(s.sse / s.n); }

double rsr(const PredictionSet& ps) {
  const Sums s = accumulate(ps);
  require_variance(s);
  return std::sqrt(s.sse / s.n) / std::sqrt(s.sst / s.n);
}

MetricsReport metrics_report(const PredictionSet& ps) {
  const Sums s = accumulate(ps);
  MetricsReport r;
  r.bias = s.signed_err / s.n;
  r.mae = s.abs_err / s.n;
  r.rmse = std::sqrt(s.sse / s.n);
  if (s.sst > 0.0) {
    r.nse = 1.0 - s.sse / s.sst;
    r.rsr = r.rmse / std::sqrt(s.sst / s.n);
    r.r2 = r.nse;
  }
  return r;
}

std::vector<ResidualRow> residual_table(const PredictionSet& ps) {
  ps.validate();
  std::vector<ResidualRow> rows(ps.observed.size());
  for (std::size_t k = 0; k < rows.size(); ++k)
    rows[k] = {ps.observed[k], ps.estimated[k], ps.observed[k] - ps.estimated[k]};
  return rows;
}

std::string residual_csv(const std::vector<ResidualRow>& rows, const std::string& comment) {
  std::ostringstream out;
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "observed,predicted,residual\n";
  for (const auto& r : rows)
    out << format_number(r.observed) << ',' << format_number(r.predicted) << ',' << format_number(r.residual) << '\n';
  return out.str();
}

void to_json(nlohmann::json& j, const MetricsReport& m) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j = {{"nse", opt(m.nse)}, {"bias", m.bias}, {"mae", m.mae}, {"rmse", m.rmse}, {"rsr", opt(m.rsr)}, {"r2", opt(m.r2)}};
}

}  // namespace fuelml

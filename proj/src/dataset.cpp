#include "fuelml/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "fuelml/random.hpp"

namespace fuelml {

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw std::invalid_argument("Matrix::append_row: width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void Dataset::validate() const {
  if (n() < 1 || p() < 1) throw std::invalid_argument("dataset needs at least one row and one feature");
  if (feature_names.size() != p()) throw std::invalid_argument("feature name count does not match columns");
  if (target.size() != n()) throw std::invalid_argument("target length does not match row count");
  std::unordered_set<std::string> seen;
  for (const auto& name : feature_names) {
    if (name == target_name) throw std::invalid_argument("feature '" + name + "' collides with target name");
    if (!seen.insert(name).second) throw std::invalid_argument("duplicate feature name '" + name + "'");
  }
  for (double v : features.data())
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  for (double v : target)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite target value");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.features = Matrix(rows.size(), p());
  out.target.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = features.row(rows[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.target[i] = target[rows[i]];
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

bool parse_number(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_number failed");
  return {buf, ptr};
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    std::string_view view(line);
    if (!have_header && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty() || view.starts_with('#')) continue;
    if (!have_header) {
      table.header = split_line(view);
      have_header = true;
    } else {
      table.rows.push_back(split_line(view));
    }
  }
  if (!have_header) throw std::runtime_error("'" + path.string() + "' has no header row");
  return table;
}

CsvLoad load_csv(const std::filesystem::path& path, const std::string& target_name) {
  const CsvTable table = read_csv_table(path);
  const auto& header = table.header;
  const auto target_it = std::find(header.begin(), header.end(), target_name);
  if (target_it == header.end())
    throw std::invalid_argument("target column '" + target_name + "' not found in '" + path.string() + "'");
  const auto target_col = static_cast<std::size_t>(target_it - header.begin());

  CsvLoad result;
  Dataset& data = result.dataset;
  data.target_name = target_name;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target_col) data.feature_names.push_back(header[c]);
  if (data.feature_names.empty()) throw std::invalid_argument("no predictor columns besides the target");
  data.features = Matrix(0, data.feature_names.size());

  std::vector<double> row(data.feature_names.size());
  for (const auto& cells : table.rows) {
    bool ok = cells.size() == header.size();
    double target = 0.0;
    for (std::size_t c = 0, f = 0; ok && c < header.size(); ++c) {
      double v;
      ok = parse_number(cells[c], v);
      if (c == target_col)
        target = v;
      else
        row[f++] = v;
    }
    if (!ok) {
      ++result.dropped_rows;
      continue;
    }
    data.features.append_row(row);
    data.target.push_back(target);
  }
  if (data.target.empty()) throw std::runtime_error("no usable rows in '" + path.string() + "'");
  data.validate();
  return result;
}

std::string dataset_to_csv(const Dataset& data, const std::string& comment) {
  std::ostringstream out;
  if (!comment.empty()) out << "# " << comment << '\n';
  for (const auto& name : data.feature_names) out << name << ',';
  out << data.target_name << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (double v : data.features.row(i)) out << format_number(v) << ',';
    out << format_number(data.target[i]) << '\n';
  }
  return out.str();
}

std::string fingerprint(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* bytes, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  auto feed_double = [&](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    feed(&bits, sizeof bits);
  };
  for (const auto& name : data.feature_names) feed(name.data(), name.size() + 1);
  feed(data.target_name.data(), data.target_name.size() + 1);
  for (double v : data.features.data()) feed_double(v);
  for (double v : data.target) feed_double(v);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Synthetic data

void SynthConfig::validate() const {
  if (n_rows < 2) throw std::invalid_argument("synthetic data needs n_rows >= 2");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw std::invalid_argument("noise_sigma must be finite and >= 0");
}

Dataset synth_fuel(const SynthConfig& config) {
  config.validate();
  Dataset data;
  data.feature_names = {"running_time_h", "generator_capacity_kva", "rate_l_per_h", "num_days"};
  for (std::size_t k = 1; k <= config.n_noise_features; ++k)
    data.feature_names.push_back("noise_" + std::to_string(k));
  data.target_name = "fuel_l";
  const std::size_t p = data.feature_names.size();
  data.features = Matrix(config.n_rows, p);
  data.target.resize(config.n_rows);

  Rng rng(config.seed);
  std::uniform_real_distribution<double> hours_dist(0.0, kMaxRunningHours);
  std::uniform_int_distribution<int> class_dist(0, 3);
  std::uniform_real_distribution<double> jitter_dist(-kRateJitter, kRateJitter);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (std::size_t i = 0; i < config.n_rows; ++i) {
    const double hours = hours_dist(rng);
    const int cls = class_dist(rng);
    const double rate = kBaseRateLph[cls] * (1.0 + jitter_dist(rng));
    auto row = data.features.row(i);
    row[0] = hours;
    row[1] = kCapacityKva[cls];
    row[2] = rate;
    row[3] = std::round(hours / 24.0);
    for (std::size_t k = 0; k < config.n_noise_features; ++k) row[4 + k] = normal(rng);
    const double eps = config.noise_sigma * normal(rng);
    data.target[i] = std::max(0.0, rate * hours * (1.0 + eps));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Scaling and splitting

std::vector<double> ScalingParams::apply(std::span<const double> row) const {
  if (row.size() != means.size()) throw std::invalid_argument("row width does not match scaling");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - means[j]) / scales[j];
  return out;
}

Matrix ScalingParams::apply(const Matrix& m) const {
  if (m.cols() != means.size()) throw std::invalid_argument("matrix width does not match scaling");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = (m(i, j) - means[j]) / scales[j];
  return out;
}

Matrix ScalingParams::invert(const Matrix& m) const {
  if (m.cols() != means.size()) throw std::invalid_argument("matrix width does not match scaling");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j) * scales[j] + means[j];
  return out;
}

ScalingParams fit_scaling(const Matrix& m) {
  if (m.rows() == 0) throw std::invalid_argument("cannot fit scaling on zero rows");
  ScalingParams s;
  s.means.assign(m.cols(), 0.0);
  s.scales.assign(m.cols(), 1.0);
  const auto n = static_cast<double>(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) sum += m(i, j);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) ss += (m(i, j) - mean) * (m(i, j) - mean);
    const double sd = std::sqrt(ss / n);
    s.means[j] = mean;
    s.scales[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

std::pair<Dataset, ScalingParams> standardize(const Dataset& data) {
  ScalingParams params = fit_scaling(data.features);
  Dataset out = data;
  out.features = params.apply(data.features);
  return {std::move(out), std::move(params)};
}

Split holdout_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("hold-out split needs at least 2 rows");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  const auto order = shuffled_indices(n, seed);
  Split split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  return split;
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& data, double test_fraction, std::uint64_t seed) {
  const Split s = holdout_split(data.n(), test_fraction, seed);
  return {data.subset(s.train), data.subset(s.test)};
}

void to_json(nlohmann::json& j, const ScalingParams& s) {
  j = {{"means", s.means}, {"scales", s.scales}};
}

void from_json(const nlohmann::json& j, ScalingParams& s) {
  j.at("means").get_to(s.means);
  j.at("scales").get_to(s.scales);
  if (s.means.size() != s.scales.size()) throw std::invalid_argument("scaling: means/scales length mismatch");
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = {{"n_rows", c.n_rows},
       {"n_noise_features", c.n_noise_features},
       {"noise_sigma", c.noise_sigma},
       {"seed", c.seed}};
}

}  // namespace fuelml

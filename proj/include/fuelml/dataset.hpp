#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fuelml {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;

  void append_row(std::span<const double> values);

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Named numeric feature table plus a regression target.
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix features;  // n x p
  std::vector<double> target;
  std::string target_name;

  std::size_t n() const { return features.rows(); }
  std::size_t p() const { return features.cols(); }

  /// Throws std::invalid_argument when a structural invariant is broken
  /// (shape mismatch, non-finite cell, duplicate or target-colliding name).
  void validate() const;

  /// Rows in the given order; duplicates allowed.
  Dataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct CsvLoad {
  Dataset dataset;
  std::size_t dropped_rows = 0;
};

/// Reads a headered CSV. Every non-target column becomes a feature; rows with
/// a blank or unparseable cell are dropped and counted. Lines starting with
/// '#' are comments.
CsvLoad load_csv(const std::filesystem::path& path, const std::string& target_name);

/// Raw parsed CSV: header plus rows of cells. No numeric conversion.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv_table(const std::filesystem::path& path);

/// Strict numeric parse of one cell; returns false on blank or junk.
bool parse_number(std::string_view cell, double& out);

/// Shortest round-trip decimal for a double.
std::string format_number(double value);

/// Serializes a dataset as CSV (features then target). `comment`, when
/// non-empty, is written first as a '#' line.
std::string dataset_to_csv(const Dataset& data, const std::string& comment = {});

/// Stable 64-bit content hash (names and values) rendered as hex.
std::string fingerprint(const Dataset& data);

// ---------------------------------------------------------------------------
// Synthetic generator-fuel data

struct SynthConfig {
  std::size_t n_rows = 6000;
  std::size_t n_noise_features = 5;
  double noise_sigma = 0.05;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Generator capacity classes (kVA) and their base consumption (L/h).
inline constexpr double kCapacityKva[4] = {10.0, 20.0, 30.0, 60.0};
inline constexpr double kBaseRateLph[4] = {1.2, 2.0, 2.8, 5.0};
inline constexpr double kMaxRunningHours = 720.0;
inline constexpr double kRateJitter = 0.05;

/// Columns: running_time_h, generator_capacity_kva, rate_l_per_h, num_days,
/// noise_1..noise_k; target fuel_l = rate * hours * (1 + eps), clamped at 0.
/// Draw order per row: hours, capacity class, rate jitter, noise features, eps.
Dataset synth_fuel(const SynthConfig& config);

// ---------------------------------------------------------------------------
// Scaling and splitting

struct ScalingParams {
  std::vector<double> means;
  std::vector<double> scales;  // population std, or 1 for constant columns

  std::vector<double> apply(std::span<const double> row) const;
  Matrix apply(const Matrix& m) const;
  Matrix invert(const Matrix& m) const;

  friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

ScalingParams fit_scaling(const Matrix& m);

/// Standardizes every feature column to mean 0 / population std 1; the target
/// is untouched.
std::pair<Dataset, ScalingParams> standardize(const Dataset& data);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1; the first round(n * test_fraction) (clamped to
/// [1, n-1]) shuffled indices form the test side.
Split holdout_split(std::size_t n, double test_fraction, std::uint64_t seed);

std::pair<Dataset, Dataset> split_holdout(const Dataset& data, double test_fraction,
                                          std::uint64_t seed);

void to_json(nlohmann::json& j, const ScalingParams& s);
void from_json(const nlohmann::json& j, ScalingParams& s);
void to_json(nlohmann::json& j, const SynthConfig& c);

}  // namespace fuelml

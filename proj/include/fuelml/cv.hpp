#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuelml/dataset.hpp"
#include "fuelml/metrics.hpp"

namespace fuelml {

struct CvPlan {
  enum class Scheme { holdout, kfold, loocv, repeated_kfold };

  Scheme scheme = Scheme::kfold;
  double test_fraction = 0.25;  // holdout only
  std::size_t k = 10;           // kfold / repeated_kfold
  std::size_t repeats = 1;      // repeated_kfold
  std::uint64_t seed = 0;

  static CvPlan holdout(double test_fraction, std::uint64_t seed);
  static CvPlan kfold(std::size_t k, std::uint64_t seed);
  static CvPlan loocv(std::uint64_t seed);
  static CvPlan repeated_kfold(std::size_t k, std::size_t repeats, std::uint64_t seed);

  void validate(std::size_t n) const;
  std::size_t split_count(std::size_t n) const;
};

struct FoldSplit {
  std::vector<std::size_t> train;  // shuffled order
  std::vector<std::size_t> test;
  std::size_t repeat = 0;
};

/// kfold: K contiguous chunks of a seeded shuffle, sizes differing by at most
/// one with the larger chunks first. loocv: n singleton tests.
/// repeated_kfold: repeat r reshuffles with derive_seed(seed, r).
/// holdout: one split, identical to holdout_split.
std::vector<FoldSplit> make_folds(std::size_t n, const CvPlan& plan);

using Predictor = std::function<double(std::span<const double>)>;

/// A fitted model as seen by the harness, plus free-form details worth
/// reporting (e.g. a selected hyperparameter).
struct Fitted {
  Predictor predict;
  nlohmann::json info;
};

/// Fits on a training set with the given seed. Must be safe to call
/// concurrently.
using Learner = std::function<Fitted(const Dataset& train, std::uint64_t seed)>;

struct MetricSummary {
  std::optional<double> mean;
  std::optional<double> std;  // population
  std::size_t count = 0;
};

struct CvResult {
  std::vector<MetricsReport> folds;
  MetricSummary nse, bias, mae, rmse, rsr, r2;
  /// Folds whose test targets had zero variance; left out of the
  /// nse/rsr/r2 summaries.
  std::size_t excluded = 0;
  /// Metrics over every out-of-fold prediction pooled together.
  MetricsReport pooled;
  std::vector<FoldSplit> splits;
  std::vector<std::vector<double>> test_predictions;  // aligned with splits[i].test
  std::vector<nlohmann::json> fold_info;
};

/// Runs each split independently (train-only fitting, learner seed
/// derive_seed(plan.seed, split index)). `threads` = 0 uses the hardware
/// concurrency; results never depend on scheduling.
CvResult cross_validate(const Learner& learner, const Dataset& data, const CvPlan& plan, std::size_t threads = 0);

struct CurvePoint {
  std::size_t size = 0;
  std::optional<double> train_nse;
  std::optional<double> cv_nse;
};

/// For each size s, each split fits on its first s shuffled training rows and
/// is scored on those rows and on its test fold; scores are averaged across
/// splits.
std::vector<CurvePoint> learning_curve(const Learner& learner, const Dataset& data, std::span<const std::size_t> sizes,
                                       const CvPlan& plan, std::size_t threads = 0);

/// `size,train_nse,cv_nse` CSV.
std::string learning_curve_csv(const std::vector<CurvePoint>& points, const std::string& comment = {});

/// Runs fn(0..count-1) on up to `threads` workers (0 = hardware concurrency).
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

void to_json(nlohmann::json& j, const CvPlan& p);
void to_json(nlohmann::json& j, const MetricSummary& s);
void to_json(nlohmann::json& j, const CvResult& r);

}  // namespace fuelml

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "fuelml/dataset.hpp"
#include "fuelml/tree.hpp"

namespace fuelml {

// ---------------------------------------------------------------------------
// Random forest

struct ForestConfig {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  MaxFeatures m_try = MaxFeatures::third();
  TreeConfig tree;  // split_mode must be exact; its seed is ignored
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  /// Per-tree bootstrap draws (row indices into the training set); empty
  /// vectors when bootstrap is off.
  std::vector<std::vector<std::size_t>> bootstrap_rows;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

/// Bagged exact-split trees. Tree i draws its bootstrap sample and node
/// feature subsets from derive_seed(config.seed, i).
ForestModel fit_forest(const Dataset& data, const ForestConfig& config);

double predict_forest(const ForestModel& model, std::span<const double> row);

// ---------------------------------------------------------------------------
// Gradient boosting (squared error)

struct GbmConfig {
  std::size_t n_stages = 100;
  double learning_rate = 0.1;
  TreeConfig tree = default_stage_tree();
  std::uint64_t seed = 0;

  void validate() const;
  static TreeConfig default_stage_tree() {
    TreeConfig t;
    t.max_depth = 3;
    return t;
  }

  friend bool operator==(const GbmConfig&, const GbmConfig&) = default;
};

struct GbmStage {
  TreeModel tree;
  double learning_rate = 0.0;

  friend bool operator==(const GbmStage&, const GbmStage&) = default;
};

/// F(x) = init_value + sum over stages of learning_rate * tree(x).
struct GbmModel {
  double init_value = 0.0;
  std::size_t n_features = 0;
  std::vector<GbmStage> stages;

  friend bool operator==(const GbmModel&, const GbmModel&) = default;
};

GbmModel fit_gbm(const Dataset& data, const GbmConfig& config);

double predict_gbm(const GbmModel& model, std::span<const double> row);

/// Training MSE of F_0, F_1, ..., F_M on `data`.
std::vector<double> staged_train_mse(const GbmModel& model, const Dataset& data);

void to_json(nlohmann::json& j, const ForestConfig& c);
void from_json(const nlohmann::json& j, ForestConfig& c);
void to_json(nlohmann::json& j, const ForestModel& m);
void from_json(const nlohmann::json& j, ForestModel& m);
void to_json(nlohmann::json& j, const GbmConfig& c);
void from_json(const nlohmann::json& j, GbmConfig& c);
void to_json(nlohmann::json& j, const GbmModel& m);
void from_json(const nlohmann::json& j, GbmModel& m);

}  // namespace fuelml

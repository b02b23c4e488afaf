#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fuelml/cv.hpp"
#include "fuelml/dataset.hpp"
#include "fuelml/ensemble.hpp"
#include "fuelml/lasso.hpp"
#include "fuelml/mlp.hpp"
#include "fuelml/tree.hpp"

namespace fuelml {

enum class ModelKind { gbm, forest, mlp, lasso, tree, mean };

std::string model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Predicts the training-target mean for every row.
struct MeanModel {
  double value = 0.0;
  std::size_t n_features = 0;
};

/// Lambda search used when a lasso learner tunes its own penalty:
/// `n_lambdas` log-spaced values over [min_ratio, 1] x lambda_max, scored by
/// inner K-fold CV on the training data only.
struct LassoGrid {
  bool enabled = false;
  std::size_t n_lambdas = 10;
  double min_ratio = 1e-4;
  std::size_t inner_folds = 5;
};

struct LearnerSpec {
  ModelKind kind = ModelKind::gbm;
  GbmConfig gbm;
  ForestConfig forest;
  MlpConfig mlp;
  LassoConfig lasso;
  LassoGrid lasso_grid;
  TreeConfig tree;
};

using Model = std::variant<MeanModel, TreeModel, ForestModel, GbmModel, LassoModel, MlpModel>;

/// Fits the configured model; `seed` replaces the config's own seed.
Model fit_model(const LearnerSpec& spec, const Dataset& train, std::uint64_t seed);

double predict(const Model& model, std::span<const double> row);

ModelKind kind_of(const Model& model);

Learner make_learner(const LearnerSpec& spec);

/// Ascending log-spaced lambdas; all zeros when lambda_max is 0.
std::vector<double> lasso_lambda_grid(double lambda_max, const LassoGrid& grid);

/// Picks lambda by inner CV (highest mean fold NSE, ties to the larger
/// lambda) and refits on all of `train`.
LassoModel fit_lasso_tuned(const Dataset& train, const LassoConfig& base, const LassoGrid& grid, std::uint64_t seed);

nlohmann::json spec_config_json(const LearnerSpec& spec);

/// {type, config, feature_names, target_name, model}
nlohmann::json model_envelope(const LearnerSpec& spec, const Model& model, const Dataset& train);

struct LoadedModel {
  Model model;
  ModelKind kind = ModelKind::mean;
  std::vector<std::string> feature_names;
  std::string target_name;
  nlohmann::json config;
};

LoadedModel model_from_envelope(const nlohmann::json& j);

}  // namespace fuelml

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fuelml/dataset.hpp"

namespace fuelml {

enum class Activation { sigmoid, tanh };

struct MlpConfig {
  std::size_t n_hidden = 16;
  Activation activation = Activation::sigmoid;
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  bool standardize_target = true;

  void validate() const;

  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

/// One hidden layer, linear output:
///   h = act(W1 x' + b1),  y' = w2 . h + b2
/// where x' is the scaled input and y = y' * target_scale + target_mean.
struct MlpModel {
  std::size_t n_inputs = 0;
  std::size_t n_hidden = 0;
  Activation activation = Activation::sigmoid;
  std::vector<double> w1;  // n_hidden x n_inputs, row-major
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
  ScalingParams input_scaling;
  double target_mean = 0.0;
  double target_scale = 1.0;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Same shapes as the model parameters.
struct MlpGradient {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

struct TrainTrace {
  std::vector<double> epoch_mse;  // training MSE on the scaled target
};

/// Glorot-uniform weights from the seeded stream; every bias starts at 1.
/// Scaling is the identity.
MlpModel init_mlp(std::size_t p, const MlpConfig& config);

/// Prediction on the original target scale.
double mlp_forward(const MlpModel& model, std::span<const double> row);

/// Mean squared error over a batch, measured on the model's scaled target.
double mlp_loss(const MlpModel& model, const Matrix& rows, std::span<const double> targets);

/// Exact gradient of mlp_loss by reverse-mode differentiation.
MlpGradient mlp_gradient(const MlpModel& model, const Matrix& rows, std::span<const double> targets);

/// Mini-batch gradient descent with momentum on standardized inputs (and
/// target when configured). Batches come from a seeded shuffle per epoch.
std::pair<MlpModel, TrainTrace> fit_mlp(const Dataset& data, const MlpConfig& config);

void to_json(nlohmann::json& j, const MlpConfig& c);
void from_json(const nlohmann::json& j, MlpConfig& c);
void to_json(nlohmann::json& j, const MlpModel& m);
void from_json(const nlohmann::json& j, MlpModel& m);

}  // namespace fuelml

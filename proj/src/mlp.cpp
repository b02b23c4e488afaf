#include "fuelml/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fuelml/random.hpp"

namespace fuelml {

void MlpConfig::validate() const {
  if (n_hidden < 1) throw std::invalid_argument("n_hidden must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
}

namespace {

double activate(Activation a, double x) {
  return a == Activation::sigmoid ? 1.0 / (1.0 + std::exp(-x)) : std::tanh(x);
}

// Derivative expressed through the activation output h.
double activate_slope(Activation a, double h) {
  return a == Activation::sigmoid ? h * (1.0 - h) : 1.0 - h * h;
}

void check_width(const MlpModel& m, std::size_t width) {
  if (width != m.n_inputs)
    throw std::invalid_argument("row has " + std::to_string(width) + " values, network expects " +
                                std::to_string(m.n_inputs));
}

// Forward pass on an already scaled input; fills `hidden`.
double forward_scaled(const MlpModel& m, std::span<const double> x, std::vector<double>& hidden) {
  hidden.resize(m.n_hidden);
  double out = m.b2;
  for (std::size_t k = 0; k < m.n_hidden; ++k) {
    double a = m.b1[k];
    const double* w = m.w1.data() + k * m.n_inputs;
    for (std::size_t j = 0; j < m.n_inputs; ++j) a += w[j] * x[j];
    hidden[k] = activate(m.activation, a);
    out += m.w2[k] * hidden[k];
  }
  return out;
}

MlpGradient zero_gradient(const MlpModel& m) {
  return {std::vector<double>(m.w1.size(), 0.0), std::vector<double>(m.n_hidden, 0.0),
          std::vector<double>(m.n_hidden, 0.0), 0.0};
}

// Adds d(mean squared error)/d(params) for the listed samples, given scaled
// inputs and targets.
void accumulate_gradient(const MlpModel& m, const Matrix& x, std::span<const double> t,
                         std::span<const std::size_t> samples, MlpGradient& g, std::vector<double>& hidden) {
  const double inv_b = 1.0 / static_cast<double>(samples.size());
  for (auto i : samples) {
    const auto row = x.row(i);
    const double err = 2.0 * (forward_scaled(m, row, hidden) - t[i]) * inv_b;
    g.b2 += err;
    for (std::size_t k = 0; k < m.n_hidden; ++k) {
      g.w2[k] += err * hidden[k];
      const double delta = err * m.w2[k] * activate_slope(m.activation, hidden[k]);
      g.b1[k] += delta;
      double* gw = g.w1.data() + k * m.n_inputs;
      for (std::size_t j = 0; j < m.n_inputs; ++j) gw[j] += delta * row[j];
    }
  }
}

void scaled_batch(const MlpModel& m, const Matrix& rows, std::span<const double> targets, Matrix& x,
                  std::vector<double>& t) {
  check_width(m, rows.cols());
  if (targets.size() != rows.rows()) throw std::invalid_argument("batch targets do not match rows");
  if (rows.rows() == 0) throw std::invalid_argument("empty batch");
  x = m.input_scaling.apply(rows);
  t.resize(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) t[i] = (targets[i] - m.target_mean) / m.target_scale;
}

double scaled_mse(const MlpModel& m, const Matrix& x, std::span<const double> t, std::vector<double>& hidden) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double e = forward_scaled(m, x.row(i), hidden) - t[i];
    s += e * e;
  }
  return s / static_cast<double>(x.rows());
}

}  // namespace

MlpModel init_mlp(std::size_t p, const MlpConfig& config) {
  config.validate();
  if (p < 1) throw std::invalid_argument("network needs at least one input");
  MlpModel m;
  m.n_inputs = p;
  m.n_hidden = config.n_hidden;
  m.activation = config.activation;
  m.input_scaling = {std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)};

  Rng rng(derive_seed(config.seed, 0));
  const double limit1 = std::sqrt(6.0 / static_cast<double>(p + config.n_hidden));
  const double limit2 = std::sqrt(6.0 / static_cast<double>(config.n_hidden + 1));
  std::uniform_real_distribution<double> u1(-limit1, limit1);
  std::uniform_real_distribution<double> u2(-limit2, limit2);
  m.w1.resize(config.n_hidden * p);
  for (auto& w : m.w1) w = u1(rng);
  m.w2.resize(config.n_hidden);
  for (auto& w : m.w2) w = u2(rng);
  m.b1.assign(config.n_hidden, 1.0);
  m.b2 = 1.0;
  return m;
}

double mlp_forward(const MlpModel& model, std::span<const double> row) {
  check_width(model, row.size());
  std::vector<double> hidden;
  const auto x = model.input_scaling.apply(row);
  return forward_scaled(model, x, hidden) * model.target_scale + model.target_mean;
}

double mlp_loss(const MlpModel& model, const Matrix& rows, std::span<const double> targets) {
  Matrix x;
  std::vector<double> t, hidden;
  scaled_batch(model, rows, targets, x, t);
  return scaled_mse(model, x, t, hidden);
}

MlpGradient mlp_gradient(const MlpModel& model, const Matrix& rows, std::span<const double> targets) {
  Matrix x;
  std::vector<double> t, hidden;
  scaled_batch(model, rows, targets, x, t);
  std::vector<std::size_t> all(x.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  MlpGradient g = zero_gradient(model);
  accumulate_gradient(model, x, t, all, g, hidden);
  return g;
}

std::pair<MlpModel, TrainTrace> fit_mlp(const Dataset& data, const MlpConfig& config) {
  config.validate();
  data.validate();
  const std::size_t n = data.n();
  if (config.batch_size > n)
    throw std::invalid_argument("batch_size " + std::to_string(config.batch_size) + " exceeds " + std::to_string(n) +
                                " training rows");

  MlpModel model = init_mlp(data.p(), config);
  model.input_scaling = fit_scaling(data.features);
  if (config.standardize_target) {
    double mean = 0.0;
    for (double y : data.target) mean += y;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double y : data.target) ss += (y - mean) * (y - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    model.target_mean = mean;
    model.target_scale = sd > 0.0 ? sd : 1.0;
  }

  Matrix x;
  std::vector<double> t, hidden;
  scaled_batch(model, data.features, data.target, x, t);

  MlpGradient velocity = zero_gradient(model);
  TrainTrace trace;
  trace.epoch_mse.reserve(config.epochs);
  Rng shuffle_rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  const double lr = config.learning_rate, mu = config.momentum;
  auto step = [&](std::vector<double>& param, std::vector<double>& vel, const std::vector<double>& grad) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      vel[i] = mu * vel[i] - lr * grad[i];
      param[i] += vel[i];
    }
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const auto batch = std::span<const std::size_t>(order).subspan(start, stop - start);
      MlpGradient g = zero_gradient(model);
      accumulate_gradient(model, x, t, batch, g, hidden);
      step(model.w1, velocity.w1, g.w1);
      step(model.b1, velocity.b1, g.b1);
      step(model.w2, velocity.w2, g.w2);
      velocity.b2 = mu * velocity.b2 - lr * g.b2;
      model.b2 += velocity.b2;
    }
    trace.epoch_mse.push_back(scaled_mse(model, x, t, hidden));
  }
  return {std::move(model), std::move(trace)};
}

// ---------------------------------------------------------------------------
// JSON

namespace {

const char* activation_name(Activation a) { return a == Activation::sigmoid ? "sigmoid" : "tanh"; }

Activation parse_activation(const std::string& s) {
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const MlpConfig& c) {
  j = {{"n_hidden", c.n_hidden},
       {"activation", activation_name(c.activation)},
       {"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"learning_rate", c.learning_rate},
       {"momentum", c.momentum},
       {"seed", c.seed},
       {"standardize_target", c.standardize_target}};
}

void from_json(const nlohmann::json& j, MlpConfig& c) {
  j.at("n_hidden").get_to(c.n_hidden);
  c.activation = parse_activation(j.at("activation").get<std::string>());
  j.at("epochs").get_to(c.epochs);
  j.at("batch_size").get_to(c.batch_size);
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("momentum").get_to(c.momentum);
  j.at("seed").get_to(c.seed);
  j.at("standardize_target").get_to(c.standardize_target);
}

void to_json(nlohmann::json& j, const MlpModel& m) {
  j = {{"n_inputs", m.n_inputs},
       {"n_hidden", m.n_hidden},
       {"activation", activation_name(m.activation)},
       {"W1", m.w1},
       {"b1", m.b1},
       {"w2", m.w2},
       {"b2", m.b2},
       {"scaling", {{"inputs", m.input_scaling}, {"target_mean", m.target_mean}, {"target_scale", m.target_scale}}}};
}

void from_json(const nlohmann::json& j, MlpModel& m) {
  j.at("n_inputs").get_to(m.n_inputs);
  j.at("n_hidden").get_to(m.n_hidden);
  m.activation = parse_activation(j.at("activation").get<std::string>());
  j.at("W1").get_to(m.w1);
  j.at("b1").get_to(m.b1);
  j.at("w2").get_to(m.w2);
  j.at("b2").get_to(m.b2);
  const auto& s = j.at("scaling");
  s.at("inputs").get_to(m.input_scaling);
  s.at("target_mean").get_to(m.target_mean);
  s.at("target_scale").get_to(m.target_scale);
  if (m.w1.size() != m.n_hidden * m.n_inputs || m.b1.size() != m.n_hidden || m.w2.size() != m.n_hidden ||
      m.input_scaling.means.size() != m.n_inputs)
    throw std::invalid_argument("mlp: parameter shapes do not match n_inputs/n_hidden");
}

}  // namespace fuelml

#include "fuelml/ensemble.hpp"

#include <cmath>
#include <stdexcept>

#include "fuelml/random.hpp"

namespace fuelml {

void ForestConfig::validate() const {
  if (n_trees < 1) throw std::invalid_argument("forest needs n_trees >= 1");
  if (tree.split_mode != SplitMode::exact) throw std::invalid_argument("forest trees use exact splits");
  tree.validate();
}

ForestModel fit_forest(const Dataset& data, const ForestConfig& config) {
  config.validate();
  if (data.n() == 0) throw std::invalid_argument("cannot fit a forest on an empty dataset");
  const std::size_t n = data.n();
  const detail::ColumnOrder order(data.features);

  ForestModel model;
  model.trees.reserve(config.n_trees);
  model.bootstrap_rows.reserve(config.n_trees);
  std::vector<std::uint32_t> weights(n);
  for (std::size_t i = 0; i < config.n_trees; ++i) {
    const std::uint64_t tree_seed = derive_seed(config.seed, i);
    std::vector<std::size_t> drawn;
    if (config.bootstrap) {
      Rng rng(tree_seed);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      drawn.resize(n);
      std::fill(weights.begin(), weights.end(), 0u);
      for (auto& r : drawn) {
        r = pick(rng);
        ++weights[r];
      }
    } else {
      std::fill(weights.begin(), weights.end(), 1u);
    }
    TreeConfig tree_config = config.tree;
    tree_config.n_candidate_features = config.m_try;
    tree_config.seed = derive_seed(tree_seed, 1);
    model.trees.push_back(detail::grow_tree(data.features, data.target, weights, order, tree_config));
    model.bootstrap_rows.push_back(std::move(drawn));
  }
  return model;
}

double predict_forest(const ForestModel& model, std::span<const double> row) {
  if (model.trees.empty()) throw std::logic_error("forest has no trees");
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += predict_tree(tree, row);
  return sum / static_cast<double>(model.trees.size());
}

// ---------------------------------------------------------------------------

void GbmConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw std::invalid_argument("learning_rate must lie in (0, 1]");
  if (tree.split_mode != SplitMode::exact) throw std::invalid_argument("boosting stages use exact splits");
  tree.validate();
}

GbmModel fit_gbm(const Dataset& data, const GbmConfig& config) {
  config.validate();
  if (data.n() == 0) throw std::invalid_argument("cannot fit boosting on an empty dataset");
  const std::size_t n = data.n();

  GbmModel model;
  model.n_features = data.p();
  double sum = 0.0;
  for (double y : data.target) sum += y;
  model.init_value = sum / static_cast<double>(n);

  std::vector<double> fitted(n, model.init_value);
  std::vector<double> residuals(n);
  const std::vector<std::uint32_t> weights(n, 1);
  const detail::ColumnOrder order(data.features);
  model.stages.reserve(config.n_stages);
  for (std::size_t m = 0; m < config.n_stages; ++m) {
    for (std::size_t i = 0; i < n; ++i) residuals[i] = data.target[i] - fitted[i];
    TreeConfig tree_config = config.tree;
    tree_config.seed = derive_seed(config.seed, m);
    TreeModel tree = detail::grow_tree(data.features, residuals, weights, order, tree_config);
    for (std::size_t i = 0; i < n; ++i) fitted[i] += config.learning_rate * predict_tree(tree, data.features.row(i));
    model.stages.push_back({std::move(tree), config.learning_rate});
  }
  return model;
}

double predict_gbm(const GbmModel& model, std::span<const double> row) {
  if (row.size() != model.n_features)
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " values, model expects " +
                                std::to_string(model.n_features));
  double out = model.init_value;
  for (const auto& stage : model.stages) out += stage.learning_rate * predict_tree(stage.tree, row);
  return out;
}

std::vector<double> staged_train_mse(const GbmModel& model, const Dataset& data) {
  if (data.p() != model.n_features) throw std::invalid_argument("dataset width does not match model");
  const std::size_t n = data.n();
  std::vector<double> fitted(n, model.init_value);
  std::vector<double> out;
  out.reserve(model.stages.size() + 1);
  auto mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (data.target[i] - fitted[i]) * (data.target[i] - fitted[i]);
    return s / static_cast<double>(n);
  };
  out.push_back(mse());
  for (const auto& stage : model.stages) {
    for (std::size_t i = 0; i < n; ++i) fitted[i] += stage.learning_rate * predict_tree(stage.tree, data.features.row(i));
    out.push_back(mse());
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const ForestConfig& c) {
  j = {{"n_trees", c.n_trees}, {"bootstrap", c.bootstrap}, {"m_try", c.m_try}, {"tree", c.tree}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ForestConfig& c) {
  j.at("n_trees").get_to(c.n_trees);
  j.at("bootstrap").get_to(c.bootstrap);
  j.at("m_try").get_to(c.m_try);
  j.at("tree").get_to(c.tree);
  j.at("seed").get_to(c.seed);
}

void to_json(nlohmann::json& j, const ForestModel& m) {
  j = {{"trees", m.trees}, {"bootstrap_rows", m.bootstrap_rows}};
}

void from_json(const nlohmann::json& j, ForestModel& m) {
  j.at("trees").get_to(m.trees);
  j.at("bootstrap_rows").get_to(m.bootstrap_rows);
  if (m.bootstrap_rows.size() != m.trees.size()) throw std::invalid_argument("forest: bootstrap record count mismatch");
}

void to_json(nlohmann::json& j, const GbmConfig& c) {
  j = {{"n_stages", c.n_stages}, {"learning_rate", c.learning_rate}, {"tree", c.tree}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, GbmConfig& c) {
  j.at("n_stages").get_to(c.n_stages);
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("tree").get_to(c.tree);
  j.at("seed").get_to(c.seed);
}

void to_json(nlohmann::json& j, const GbmModel& m) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : m.stages) stages.push_back({{"learning_rate", s.learning_rate}, {"tree", s.tree}});
  j = {{"init_value", m.init_value}, {"n_features", m.n_features}, {"stages", std::move(stages)}};
}

void from_json(const nlohmann::json& j, GbmModel& m) {
  j.at("init_value").get_to(m.init_value);
  j.at("n_features").get_to(m.n_features);
  m.stages.clear();
  for (const auto& s : j.at("stages")) {
    GbmStage stage;
    s.at("learning_rate").get_to(stage.learning_rate);
    s.at("tree").get_to(stage.tree);
    m.stages.push_back(std::move(stage));
  }
}

}  // namespace fuelml

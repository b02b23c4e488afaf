#include "fuelml/learners.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace fuelml {

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::gbm: return "gbm";
    case ModelKind::forest: return "forest";
    case ModelKind::mlp: return "mlp";
    case ModelKind::lasso: return "lasso";
    case ModelKind::tree: return "tree";
    case ModelKind::mean: return "mean";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  for (auto k : {ModelKind::gbm, ModelKind::forest, ModelKind::mlp, ModelKind::lasso, ModelKind::tree, ModelKind::mean})
    if (model_kind_name(k) == name) return k;
  throw std::invalid_argument("unknown model '" + name + "'");
}

std::vector<double> lasso_lambda_grid(double lambda_max, const LassoGrid& grid) {
  if (grid.n_lambdas < 1) throw std::invalid_argument("lambda grid needs at least one value");
  if (!(grid.min_ratio > 0.0 && grid.min_ratio <= 1.0)) throw std::invalid_argument("min_ratio must lie in (0, 1]");
  std::vector<double> out(grid.n_lambdas);
  if (grid.n_lambdas == 1) {
    out[0] = lambda_max;
    return out;
  }
  const double steps = static_cast<double>(grid.n_lambdas - 1);
  for (std::size_t i = 0; i < grid.n_lambdas; ++i)
    out[i] = lambda_max * std::pow(grid.min_ratio, static_cast<double>(grid.n_lambdas - 1 - i) / steps);
  out.back() = lambda_max;
  return out;
}

LassoModel fit_lasso_tuned(const Dataset& train, const LassoConfig& base, const LassoGrid& grid, std::uint64_t seed) {
  const auto lambdas = lasso_lambda_grid(lasso_lambda_max(train, base.standardize_inputs), grid);
  const CvPlan inner = CvPlan::kfold(std::min(grid.inner_folds, train.n()), seed);

  double best_lambda = lambdas.back();
  double best_score = -std::numeric_limits<double>::infinity();
  for (double lambda : lambdas) {
    LassoConfig config = base;
    config.lambda = lambda;
    const Learner learner = [config](const Dataset& d, std::uint64_t) {
      auto model = std::make_shared<LassoModel>(fit_lasso(d, config));
      return Fitted{[model](std::span<const double> row) { return predict_lasso(*model, row); }, {}};
    };
    const CvResult cv = cross_validate(learner, train, inner, 1);
    const auto score = cv.nse.mean ? cv.nse.mean : cv.pooled.nse;
    if (score && *score >= best_score) {
      best_score = *score;
      best_lambda = lambda;
    }
  }
  LassoConfig config = base;
  config.lambda = best_lambda;
  return fit_lasso(train, config);
}

Model fit_model(const LearnerSpec& spec, const Dataset& train, std::uint64_t seed) {
  switch (spec.kind) {
    case ModelKind::gbm: {
      GbmConfig c = spec.gbm;
      c.seed = seed;
      return fit_gbm(train, c);
    }
    case ModelKind::forest: {
      ForestConfig c = spec.forest;
      c.seed = seed;
      return fit_forest(train, c);
    }
    case ModelKind::mlp: {
      MlpConfig c = spec.mlp;
      c.seed = seed;
      return fit_mlp(train, c).first;
    }
    case ModelKind::lasso:
      if (spec.lasso_grid.enabled) return fit_lasso_tuned(train, spec.lasso, spec.lasso_grid, seed);
      return fit_lasso(train, spec.lasso);
    case ModelKind::tree: {
      TreeConfig c = spec.tree;
      c.seed = seed;
      return fit_tree(train, c);
    }
    case ModelKind::mean: {
      if (train.n() == 0) throw std::invalid_argument("mean baseline needs training rows");
      double sum = 0.0;
      for (double y : train.target) sum += y;
      return MeanModel{sum / static_cast<double>(train.n()), train.p()};
    }
  }
  throw std::logic_error("unhandled model kind");
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double predict(const Model& model, std::span<const double> row) {
  return std::visit(Overloaded{
                        [&](const MeanModel& m) {
                          if (row.size() != m.n_features) throw std::invalid_argument("row width does not match model");
                          return m.value;
                        },
                        [&](const TreeModel& m) { return predict_tree(m, row); },
                        [&](const ForestModel& m) { return predict_forest(m, row); },
                        [&](const GbmModel& m) { return predict_gbm(m, row); },
                        [&](const LassoModel& m) { return predict_lasso(m, row); },
                        [&](const MlpModel& m) { return mlp_forward(m, row); },
                    },
                    model);
}

ModelKind kind_of(const Model& model) {
  return std::visit(Overloaded{
                        [](const MeanModel&) { return ModelKind::mean; },
                        [](const TreeModel&) { return ModelKind::tree; },
                        [](const ForestModel&) { return ModelKind::forest; },
                        [](const GbmModel&) { return ModelKind::gbm; },
                        [](const LassoModel&) { return ModelKind::lasso; },
                        [](const MlpModel&) { return ModelKind::mlp; },
                    },
                    model);
}

Learner make_learner(const LearnerSpec& spec) {
  return [spec](const Dataset& train, std::uint64_t seed) {
    auto model = std::make_shared<const Model>(fit_model(spec, train, seed));
    nlohmann::json info = nlohmann::json::object();
    if (const auto* lasso = std::get_if<LassoModel>(model.get())) {
      info["lambda"] = lasso->lambda;
      std::size_t zeros = 0;
      for (double b : lasso->coefficients) zeros += b == 0.0 ? 1 : 0;
      info["zero_coefficients"] = zeros;
    }
    return Fitted{[model](std::span<const double> row) { return predict(*model, row); }, std::move(info)};
  };
}

nlohmann::json spec_config_json(const LearnerSpec& spec) {
  switch (spec.kind) {
    case ModelKind::gbm: return spec.gbm;
    case ModelKind::forest: return spec.forest;
    case ModelKind::mlp: return spec.mlp;
    case ModelKind::lasso: {
      nlohmann::json j = spec.lasso;
      if (spec.lasso_grid.enabled)
        j["lambda_grid"] = {{"n_lambdas", spec.lasso_grid.n_lambdas},
                            {"min_ratio", spec.lasso_grid.min_ratio},
                            {"inner_folds", spec.lasso_grid.inner_folds}};
      return j;
    }
    case ModelKind::tree: return spec.tree;
    case ModelKind::mean: return nlohmann::json::object();
  }
  return nullptr;
}

nlohmann::json model_envelope(const LearnerSpec& spec, const Model& model, const Dataset& train) {
  nlohmann::json body = std::visit(Overloaded{
                                       [](const MeanModel& m) {
                                         return nlohmann::json{{"value", m.value}, {"n_features", m.n_features}};
                                       },
                                       [](const auto& m) { return nlohmann::json(m); },
                                   },
                                   model);
  return {{"type", model_kind_name(kind_of(model))},
          {"config", spec_config_json(spec)},
          {"feature_names", train.feature_names},
          {"target_name", train.target_name},
          {"model", std::move(body)}};
}

LoadedModel model_from_envelope(const nlohmann::json& j) {
  LoadedModel out;
  out.kind = parse_model_kind(j.at("type").get<std::string>());
  j.at("feature_names").get_to(out.feature_names);
  j.at("target_name").get_to(out.target_name);
  out.config = j.value("config", nlohmann::json::object());
  const auto& body = j.at("model");
  switch (out.kind) {
    case ModelKind::mean: out.model = MeanModel{body.at("value").get<double>(), body.at("n_features").get<std::size_t>()}; break;
    case ModelKind::tree: out.model = body.get<TreeModel>(); break;
    case ModelKind::forest: out.model = body.get<ForestModel>(); break;
    case ModelKind::gbm: out.model = body.get<GbmModel>(); break;
    case ModelKind::lasso: out.model = body.get<LassoModel>(); break;
    case ModelKind::mlp: out.model = body.get<MlpModel>(); break;
  }
  return out;
}

}  // namespace fuelml

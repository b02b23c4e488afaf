#include "fuelml/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "fuelml/random.hpp"
#include "fuelml/stats.hpp"

namespace fuelml::cli {

namespace fs = std::filesystem;

CvPlan RunConfig::plan() const {
  const std::uint64_t s = sub_seed(*this, SeedStream::cv);
  switch (scheme) {
    case CvPlan::Scheme::holdout: return CvPlan::holdout(test_fraction, s);
    case CvPlan::Scheme::kfold: return CvPlan::kfold(folds, s);
    case CvPlan::Scheme::loocv: return CvPlan::loocv(s);
    case CvPlan::Scheme::repeated_kfold: return CvPlan::repeated_kfold(folds, repeats, s);
  }
  return CvPlan::kfold(folds, s);
}

LearnerSpec RunConfig::spec(ModelKind kind) const {
  LearnerSpec s;
  s.kind = kind;
  s.gbm = gbm;
  s.forest = forest;
  s.mlp = mlp;
  s.lasso = lasso;
  s.lasso_grid = lasso_grid;
  return s;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json data;
  if (input) {
    data = {{"input", input->string()}};
  } else {
    SynthConfig s = synth;
    s.seed = synth_seed.value_or(seed);
    data = {{"synth", s}};
  }
  data["target"] = target;

  nlohmann::json model_names = nlohmann::json::array();
  for (auto m : models) model_names.push_back(model_kind_name(m));

  nlohmann::json j = {{"command", command},
                      {"seed", seed},
                      {"data", std::move(data)},
                      {"plan", plan()},
                      {"models", std::move(model_names)},
                      {"gbm", gbm},
                      {"forest", forest},
                      {"mlp", mlp},
                      {"lasso", lasso},
                      {"lasso_grid",
                       {{"enabled", lasso_grid.enabled},
                        {"n_lambdas", lasso_grid.n_lambdas},
                        {"min_ratio", lasso_grid.min_ratio},
                        {"inner_folds", lasso_grid.inner_folds}}},
                      {"extra_trees", {{"n_trees", extra_trees}, {"tree", extra_tree}}}};
  if (!curve_sizes.empty()) j["curve_sizes"] = curve_sizes;
  if (model_file) j["model_file"] = model_file->string();
  return j;
}

std::uint64_t sub_seed(const RunConfig& config, SeedStream stream) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(stream));
}

Dataset load_dataset(const RunConfig& config) {
  if (config.input) {
    CsvLoad load = load_csv(*config.input, config.target);
    if (load.dropped_rows > 0)
      std::cerr << "fuelml: dropped " << load.dropped_rows << " row(s) with missing or unparseable cells\n";
    return std::move(load.dataset);
  }
  SynthConfig s = config.synth;
  s.seed = config.synth_seed.value_or(config.seed);
  return synth_fuel(s);
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.close();
    if (!out) {
      fs::remove(tmp);
      throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path);
}

namespace {

std::string config_comment(const RunConfig& config) { return "config " + config.to_json().dump(); }

std::vector<ModelKind> models_or(const RunConfig& config, std::vector<ModelKind> fallback) {
  return config.models.empty() ? fallback : config.models;
}

// Writes every (path, content) pair only after all content is ready.
void write_all(const std::vector<std::pair<fs::path, std::string>>& files) {
  for (const auto& [path, content] : files) write_atomic(path, content);
}

}  // namespace

// ---------------------------------------------------------------------------
// compare

nlohmann::json CompareReport::to_json() const {
  nlohmann::json models_json = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json entry = {{"name", m.name}, {"cv", m.cv}};
    nlohmann::json summary = {{"nse_mean", m.cv.nse.mean ? nlohmann::json(*m.cv.nse.mean) : nlohmann::json(nullptr)},
                              {"nse_std", m.cv.nse.std ? nlohmann::json(*m.cv.nse.std) : nlohmann::json(nullptr)},
                              {"bias", *m.cv.bias.mean},
                              {"mae", *m.cv.mae.mean},
                              {"rmse", *m.cv.rmse.mean},
                              {"rsr", m.cv.rsr.mean ? nlohmann::json(*m.cv.rsr.mean) : nlohmann::json(nullptr)}};
    entry["summary"] = std::move(summary);
    bool any_info = false;
    for (const auto& info : m.cv.fold_info) any_info = any_info || !info.empty();
    if (any_info) entry["fold_info"] = m.cv.fold_info;
    models_json.push_back(std::move(entry));
  }
  return {{"config", config}, {"dataset_fingerprint", fingerprint}, {"models", std::move(models_json)},
          {"ranking", ranking}};
}

CompareReport run_compare(const RunConfig& config) {
  const Dataset data = load_dataset(config);
  const CvPlan plan = config.plan();

  RunConfig tuned = config;
  tuned.lasso_grid.enabled = true;

  CompareReport report;
  report.config = tuned.to_json();
  report.fingerprint = fingerprint(data);
  for (auto kind : {ModelKind::gbm, ModelKind::forest, ModelKind::mlp, ModelKind::lasso, ModelKind::mean}) {
    const Learner learner = make_learner(tuned.spec(kind));
    report.models.push_back({model_kind_name(kind), cross_validate(learner, data, plan, config.threads)});
  }

  std::vector<const ModelScore*> order;
  for (const auto& m : report.models) order.push_back(&m);
  std::sort(order.begin(), order.end(), [](const ModelScore* a, const ModelScore* b) {
    const auto& na = a->cv.nse.mean;
    const auto& nb = b->cv.nse.mean;
    if (na.has_value() != nb.has_value()) return na.has_value();
    if (na && *na != *nb) return *na > *nb;
    return a->name < b->name;
  });
  for (const auto* m : order) report.ranking.push_back(m->name);

  const std::string comment = config_comment(tuned);
  std::vector<std::pair<fs::path, std::string>> files;
  files.emplace_back(config.out_dir / "compare.json", report.to_json().dump(2) + "\n");
  for (const auto& m : report.models) {
    // Out-of-fold predictions from the first repeat; each row appears once.
    std::map<std::size_t, std::pair<double, double>> by_row;
    for (std::size_t s = 0; s < m.cv.splits.size(); ++s) {
      if (m.cv.splits[s].repeat != 0) continue;
      const auto& test = m.cv.splits[s].test;
      for (std::size_t i = 0; i < test.size(); ++i)
        by_row[test[i]] = {data.target[test[i]], m.cv.test_predictions[s][i]};
    }
    PredictionSet ps;
    std::ostringstream pred_csv;
    pred_csv << "# " << comment << "\nrow,observed,predicted\n";
    for (const auto& [row, pair] : by_row) {
      ps.observed.push_back(pair.first);
      ps.estimated.push_back(pair.second);
      pred_csv << row << ',' << format_number(pair.first) << ',' << format_number(pair.second) << '\n';
    }
    files.emplace_back(config.out_dir / ("residuals_" + m.name + ".csv"), residual_csv(residual_table(ps), comment));
    files.emplace_back(config.out_dir / ("pred_vs_obs_" + m.name + ".csv"), pred_csv.str());
  }
  write_all(files);
  return report;
}

// ---------------------------------------------------------------------------
// rank / describe / synth / curve / train / predict

std::vector<std::pair<std::string, double>> run_rank(const RunConfig& config) {
  const Dataset data = load_dataset(config);
  TreeConfig tree = config.extra_tree;
  tree.seed = sub_seed(config, SeedStream::rank);
  const auto trees = fit_extra_trees(data, config.extra_trees, tree);
  const auto scores = feature_importance(trees, data.p());

  std::vector<std::pair<std::string, double>> ranked;
  for (std::size_t j = 0; j < data.p(); ++j) ranked.emplace_back(data.feature_names[j], scores[j]);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::ostringstream csv;
  csv << "# " << config_comment(config) << "\nfeature,importance\n";
  for (const auto& [name, score] : ranked) csv << name << ',' << format_number(score) << '\n';
  write_atomic(config.out_dir / "feature_importance.csv", csv.str());
  return ranked;
}

nlohmann::json run_describe(const RunConfig& config) {
  const Dataset data = load_dataset(config);
  nlohmann::json columns = nlohmann::json::array();
  for (std::size_t j = 0; j < data.p(); ++j)
    columns.push_back({{"name", data.feature_names[j]}, {"stats", describe(data.features.column(j))}});
  columns.push_back({{"name", data.target_name}, {"stats", describe(data.target)}});

  nlohmann::json normality = nullptr;
  try {
    normality = normality_r2(data.target);
  } catch (const std::invalid_argument&) {
    // constant or too-short target: reported as null
  }
  nlohmann::json out = {{"config", config.to_json()},
                        {"dataset_fingerprint", fingerprint(data)},
                        {"n", data.n()},
                        {"p", data.p()},
                        {"target", data.target_name},
                        {"columns", std::move(columns)},
                        {"target_normality_r2", normality}};
  write_atomic(config.out_dir / "describe.json", out.dump(2) + "\n");
  return out;
}

void run_synth(const RunConfig& config) {
  const Dataset data = load_dataset(config);
  write_atomic(config.out_dir / "synth.csv", dataset_to_csv(data, config_comment(config)));
}

void run_curve(const RunConfig& config) {
  const Dataset data = load_dataset(config);
  const CvPlan plan = config.plan();
  std::vector<std::size_t> sizes = config.curve_sizes;
  if (sizes.empty()) {
    std::size_t max_train = data.n();
    for (const auto& s : make_folds(data.n(), plan)) max_train = std::min(max_train, s.train.size());
    for (std::size_t i = 1; i <= 10; ++i) {
      const std::size_t s = std::max<std::size_t>(2, max_train * i / 10);
      if (sizes.empty() || s > sizes.back()) sizes.push_back(s);
    }
  }
  const std::string comment = config_comment(config);
  std::vector<std::pair<fs::path, std::string>> files;
  for (auto kind : models_or(config, {ModelKind::gbm, ModelKind::forest, ModelKind::mlp, ModelKind::lasso})) {
    const auto points = learning_curve(make_learner(config.spec(kind)), data, sizes, plan, config.threads);
    files.emplace_back(config.out_dir / ("learning_curve_" + model_kind_name(kind) + ".csv"),
                       learning_curve_csv(points, comment));
  }
  write_all(files);
}

void run_train(const RunConfig& config) {
  const Dataset data = load_dataset(config);
  const auto kinds = models_or(config, {ModelKind::gbm});
  if (kinds.size() != 1) throw std::invalid_argument("train takes exactly one --model");
  const LearnerSpec spec = config.spec(kinds.front());
  const Model model = fit_model(spec, data, sub_seed(config, SeedStream::train));
  nlohmann::json envelope = model_envelope(spec, model, data);
  envelope["run_config"] = config.to_json();
  const fs::path path = config.model_file.value_or(config.out_dir / ("model_" + model_kind_name(kinds.front()) + ".json"));
  write_atomic(path, envelope.dump() + "\n");
}

void run_predict(const RunConfig& config) {
  if (!config.model_file) throw std::invalid_argument("predict needs --model-file");
  if (!config.input) throw std::invalid_argument("predict needs --input");
  std::ifstream in(*config.model_file);
  if (!in) throw std::runtime_error("cannot open model file '" + config.model_file->string() + "'");
  const LoadedModel loaded = model_from_envelope(nlohmann::json::parse(in));

  const CsvTable table = read_csv_table(*config.input);
  std::vector<std::size_t> columns;
  std::vector<std::string> seen;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == loaded.target_name) continue;
    columns.push_back(c);
    seen.push_back(table.header[c]);
  }
  if (seen != loaded.feature_names) {
    std::string expected;
    for (const auto& name : loaded.feature_names) expected += (expected.empty() ? "" : ",") + name;
    throw std::invalid_argument("schema mismatch: input columns must be " + expected);
  }

  std::ostringstream csv;
  nlohmann::json echo = {{"command", "predict"},
                         {"input", config.input->string()},
                         {"model_file", config.model_file->string()},
                         {"model_type", model_kind_name(loaded.kind)}};
  csv << "# config " << echo.dump() << "\nprediction\n";
  std::vector<double> row(columns.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    if (cells.size() != table.header.size())
      throw std::invalid_argument("data row " + std::to_string(r + 1) + " has the wrong number of cells");
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (!parse_number(cells[columns[j]], row[j]))
        throw std::invalid_argument("data row " + std::to_string(r + 1) + ", column '" + seen[j] + "' is not a number");
    csv << format_number(predict(loaded.model, row)) << '\n';
  }
  write_atomic(config.out_dir / "predictions.csv", csv.str());
}

// ---------------------------------------------------------------------------
// argv

namespace {

MaxFeatures parse_max_features(const std::string& s) {
  if (s == "all") return MaxFeatures::all();
  if (s == "sqrt") return MaxFeatures::sqrt();
  if (s == "third") return MaxFeatures::third();
  std::size_t pos = 0;
  const unsigned long long k = std::stoull(s, &pos);
  if (pos != s.size() || k == 0) throw std::invalid_argument("feature count must be all|sqrt|third|N>0, got '" + s + "'");
  return MaxFeatures::fixed(static_cast<std::size_t>(k));
}

std::optional<std::size_t> depth_from(long long v) {
  if (v < 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

struct RawOptions {
  std::string input, model_file, scheme = "kfold";
  std::vector<std::string> models;
  std::uint64_t synth_seed = 0;

  long long gbm_depth = 3;
  long long rf_depth = -1;
  std::string rf_mtry = "third";
  bool rf_no_bootstrap = false;
  std::string mlp_activation = "sigmoid";
  bool mlp_no_std_target = false;
  bool lasso_no_std = false;
  double lasso_lambda = -1.0;
  std::string et_max_features = "sqrt";
  long long et_depth = -1;
};

void add_options(CLI::App& sub, RunConfig& cfg, RawOptions& raw) {
  sub.add_option("--input", raw.input, "CSV input (otherwise synthetic data)");
  sub.add_option("--synth-n", cfg.synth.n_rows, "synthetic row count")->capture_default_str();
  sub.add_option("--noise", cfg.synth.noise_sigma, "synthetic relative target noise")->capture_default_str();
  sub.add_option("--noise-features", cfg.synth.n_noise_features, "synthetic nuisance columns")->capture_default_str();
  sub.add_option("--synth-seed", raw.synth_seed, "seed for synthetic data (default: --seed)");
  sub.add_option("--target", cfg.target, "target column")->capture_default_str();
  sub.add_option("--scheme", raw.scheme, "kfold|repeated_kfold|loocv|holdout")->capture_default_str();
  sub.add_option("--folds", cfg.folds, "K for k-fold schemes")->capture_default_str();
  sub.add_option("--repeats", cfg.repeats, "repeats (switches kfold to repeated_kfold when > 1)")->capture_default_str();
  sub.add_option("--test-fraction", cfg.test_fraction, "hold-out test fraction")->capture_default_str();
  sub.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  sub.add_option("--threads", cfg.threads, "worker threads, 0 = all cores")->capture_default_str();
  sub.add_option("--model", raw.models, "gbm|forest|mlp|lasso|tree|mean (repeatable)");
  sub.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  sub.add_option("--model-file", raw.model_file, "model JSON (train output / predict input)");
  sub.add_option("--sizes", cfg.curve_sizes, "learning-curve training sizes");

  sub.add_option("--gbm-stages", cfg.gbm.n_stages)->capture_default_str();
  sub.add_option("--gbm-learning-rate", cfg.gbm.learning_rate)->capture_default_str();
  sub.add_option("--gbm-max-depth", raw.gbm_depth, "-1 = unlimited")->capture_default_str();
  sub.add_option("--gbm-min-leaf", cfg.gbm.tree.min_samples_leaf)->capture_default_str();

  sub.add_option("--rf-trees", cfg.forest.n_trees)->capture_default_str();
  sub.add_option("--rf-mtry", raw.rf_mtry, "all|sqrt|third|N")->capture_default_str();
  sub.add_option("--rf-min-leaf", cfg.forest.tree.min_samples_leaf)->capture_default_str();
  sub.add_option("--rf-max-depth", raw.rf_depth, "-1 = unlimited")->capture_default_str();
  sub.add_flag("--rf-no-bootstrap", raw.rf_no_bootstrap);

  sub.add_option("--mlp-hidden", cfg.mlp.n_hidden)->capture_default_str();
  sub.add_option("--mlp-activation", raw.mlp_activation, "sigmoid|tanh")->capture_default_str();
  sub.add_option("--mlp-epochs", cfg.mlp.epochs)->capture_default_str();
  sub.add_option("--mlp-batch", cfg.mlp.batch_size)->capture_default_str();
  sub.add_option("--mlp-lr", cfg.mlp.learning_rate)->capture_default_str();
  sub.add_option("--mlp-momentum", cfg.mlp.momentum)->capture_default_str();
  sub.add_flag("--mlp-no-standardize-target", raw.mlp_no_std_target);

  sub.add_option("--lasso-lambda", raw.lasso_lambda, "fixed penalty (default: tuned on a grid)");
  sub.add_option("--lasso-tol", cfg.lasso.tol)->capture_default_str();
  sub.add_option("--lasso-max-sweeps", cfg.lasso.max_sweeps)->capture_default_str();
  sub.add_option("--lasso-grid-size", cfg.lasso_grid.n_lambdas)->capture_default_str();
  sub.add_option("--lasso-inner-folds", cfg.lasso_grid.inner_folds)->capture_default_str();
  sub.add_flag("--lasso-no-standardize", raw.lasso_no_std);

  sub.add_option("--et-trees", cfg.extra_trees)->capture_default_str();
  sub.add_option("--et-max-features", raw.et_max_features, "all|sqrt|third|N")->capture_default_str();
  sub.add_option("--et-min-leaf", cfg.extra_tree.min_samples_leaf)->capture_default_str();
  sub.add_option("--et-max-depth", raw.et_depth, "-1 = unlimited")->capture_default_str();
}

void finish(const CLI::App& sub, RunConfig& cfg, const RawOptions& raw) {
  if (!raw.input.empty()) cfg.input = raw.input;
  if (!raw.model_file.empty()) cfg.model_file = raw.model_file;
  if (sub.count("--synth-seed") > 0) cfg.synth_seed = raw.synth_seed;
  for (const auto& m : raw.models) cfg.models.push_back(parse_model_kind(m));

  if (raw.scheme == "kfold")
    cfg.scheme = cfg.repeats > 1 ? CvPlan::Scheme::repeated_kfold : CvPlan::Scheme::kfold;
  else if (raw.scheme == "repeated_kfold")
    cfg.scheme = CvPlan::Scheme::repeated_kfold;
  else if (raw.scheme == "loocv")
    cfg.scheme = CvPlan::Scheme::loocv;
  else if (raw.scheme == "holdout")
    cfg.scheme = CvPlan::Scheme::holdout;
  else
    throw std::invalid_argument("unknown --scheme '" + raw.scheme + "'");

  cfg.gbm.tree.max_depth = depth_from(raw.gbm_depth);
  cfg.forest.tree.max_depth = depth_from(raw.rf_depth);
  cfg.forest.m_try = parse_max_features(raw.rf_mtry);
  cfg.forest.bootstrap = !raw.rf_no_bootstrap;
  if (raw.mlp_activation == "sigmoid")
    cfg.mlp.activation = Activation::sigmoid;
  else if (raw.mlp_activation == "tanh")
    cfg.mlp.activation = Activation::tanh;
  else
    throw std::invalid_argument("unknown --mlp-activation '" + raw.mlp_activation + "'");
  cfg.mlp.standardize_target = !raw.mlp_no_std_target;
  cfg.lasso.standardize_inputs = !raw.lasso_no_std;
  if (sub.count("--lasso-lambda") > 0) {
    cfg.lasso.lambda = raw.lasso_lambda;
    cfg.lasso_grid.enabled = false;
  } else {
    cfg.lasso_grid.enabled = true;
  }
  cfg.extra_tree.n_candidate_features = parse_max_features(raw.et_max_features);
  cfg.extra_tree.max_depth = depth_from(raw.et_depth);

  cfg.gbm.validate();
  cfg.forest.validate();
  cfg.mlp.validate();
  cfg.lasso.validate();
  cfg.extra_tree.validate();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fuelml: tabular fuel-consumption regression toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  RawOptions raw;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth", "write a synthetic generator-fuel dataset"},
      {"describe", "descriptive statistics and target normality"},
      {"rank", "Extra-Trees feature importance ranking"},
      {"compare", "cross-validated comparison of gbm, forest, mlp, lasso and the mean baseline"},
      {"curve", "learning curves per model"},
      {"train", "fit one model on the full dataset and save it"},
      {"predict", "predict a feature CSV with a saved model"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_options(*sub, cfg, raw);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    finish(*sub, cfg, raw);
    if (cfg.command == "synth") {
      run_synth(cfg);
    } else if (cfg.command == "describe") {
      run_describe(cfg);
    } else if (cfg.command == "rank") {
      for (const auto& [name, score] : run_rank(cfg)) std::cout << name << '\t' << format_number(score) << '\n';
    } else if (cfg.command == "compare") {
      const CompareReport report = run_compare(cfg);
      std::cout << "model\tnse_mean\tnse_std\tbias\tmae\trmse\trsr\n";
      for (const auto& name : report.ranking) {
        const auto& m = *std::find_if(report.models.begin(), report.models.end(),
                                      [&](const ModelScore& s) { return s.name == name; });
        auto show = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
        std::cout << m.name << '\t' << show(m.cv.nse.mean) << '\t' << show(m.cv.nse.std) << '\t'
                  << show(m.cv.bias.mean) << '\t' << show(m.cv.mae.mean) << '\t' << show(m.cv.rmse.mean) << '\t'
                  << show(m.cv.rsr.mean) << '\n';
      }
    } else if (cfg.command == "curve") {
      run_curve(cfg);
    } else if (cfg.command == "train") {
      run_train(cfg);
    } else if (cfg.command == "predict") {
      run_predict(cfg);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "fuelml: error: " << msg << '\n';
    return 1;
  }
  return 0;
}

}  // namespace fuelml::cli

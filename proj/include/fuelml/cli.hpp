#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fuelml/cv.hpp"
#include "fuelml/dataset.hpp"
#include "fuelml/learners.hpp"

namespace fuelml::cli {

/// Everything a command needs. One master seed derives every sub-seed; the
/// synthetic data uses `synth_seed` when given, else the master seed.
struct RunConfig {
  std::string command;
  std::optional<std::filesystem::path> input;
  SynthConfig synth;
  std::optional<std::uint64_t> synth_seed;
  std::string target = "fuel_l";

  CvPlan::Scheme scheme = CvPlan::Scheme::kfold;
  std::size_t folds = 10;
  std::size_t repeats = 1;
  double test_fraction = 0.25;
  std::uint64_t seed = 42;
  std::size_t threads = 0;

  std::vector<ModelKind> models;  // empty = command default
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> model_file;
  std::vector<std::size_t> curve_sizes;  // empty = 10 evenly spaced sizes

  GbmConfig gbm;
  ForestConfig forest;
  MlpConfig mlp;
  LassoConfig lasso;
  LassoGrid lasso_grid;
  std::size_t extra_trees = 100;
  TreeConfig extra_tree = extra_trees_defaults();

  CvPlan plan() const;
  LearnerSpec spec(ModelKind kind) const;
  nlohmann::json to_json() const;
};

/// Seed streams derived from the master seed.
enum class SeedStream : std::uint64_t { cv = 1, rank = 2, train = 3 };
std::uint64_t sub_seed(const RunConfig& config, SeedStream stream);

/// Loads --input, or synthesizes data when no input is given.
Dataset load_dataset(const RunConfig& config);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct ModelScore {
  std::string name;
  CvResult cv;
};

struct CompareReport {
  nlohmann::json config;
  std::string fingerprint;
  std::vector<ModelScore> models;
  std::vector<std::string> ranking;  // by mean nse, descending; ties by name

  nlohmann::json to_json() const;
};

/// Models compared: gbm, forest, mlp, lasso (tuned lambda) and the mean
/// baseline, all on the same splits.
CompareReport run_compare(const RunConfig& config);

/// Extra-Trees importance over every predictor, sorted descending.
std::vector<std::pair<std::string, double>> run_rank(const RunConfig& config);

nlohmann::json run_describe(const RunConfig& config);
void run_synth(const RunConfig& config);
void run_curve(const RunConfig& config);
void run_train(const RunConfig& config);
void run_predict(const RunConfig& config);

/// Parses argv and dispatches. Returns the process exit status; errors are
/// reported as one line on stderr.
int main(int argc, char** argv);

}  // namespace fuelml::cli

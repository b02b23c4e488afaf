#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "fuelml/dataset.hpp"

namespace fuelml {

/// How many features a node may consider: all of them, a rule of p, or a
/// fixed count.
struct MaxFeatures {
  enum class Rule { all, sqrt, third, count };
  Rule rule = Rule::all;
  std::size_t count = 0;

  static MaxFeatures all() { return {}; }
  static MaxFeatures sqrt() { return {Rule::sqrt, 0}; }
  static MaxFeatures third() { return {Rule::third, 0}; }
  static MaxFeatures fixed(std::size_t k) { return {Rule::count, k}; }

  /// Concrete count for p features; throws when a fixed count is 0 or > p.
  std::size_t resolve(std::size_t p) const;

  friend bool operator==(const MaxFeatures&, const MaxFeatures&) = default;
};

enum class SplitMode { exact, random_threshold };

struct TreeConfig {
  std::optional<std::size_t> max_depth;  // empty = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  SplitMode split_mode = SplitMode::exact;
  MaxFeatures n_candidate_features = MaxFeatures::all();
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const TreeConfig&, const TreeConfig&) = default;
};

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // mean training target reaching the node
  std::size_t n_samples = 0;
  double impurity_decrease = 0.0;

  bool is_leaf() const { return feature == kLeaf; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary regression tree stored as a flat node array; node 0 is the root.
/// Rows go left when row[feature] <= threshold.
struct TreeModel {
  std::vector<TreeNode> nodes;
  std::size_t n_features = 0;

  std::size_t depth() const;
  std::size_t leaf_count() const;
  /// Index of the leaf a row is routed to.
  std::size_t leaf_index(std::span<const double> row) const;

  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

TreeModel fit_tree(const Dataset& data, const TreeConfig& config);

double predict_tree(const TreeModel& model, std::span<const double> row);

/// Extremely randomized trees: every tree sees the full sample; tree i is
/// seeded with derive_seed(config.seed, i). Requires random_threshold mode.
std::vector<TreeModel> fit_extra_trees(const Dataset& data, std::size_t n_trees, const TreeConfig& config);

/// Mean-decrease-in-impurity importance, averaged over trees and normalized
/// to sum to 1 (all zeros when no tree ever split).
std::vector<double> feature_importance(std::span<const TreeModel> trees, std::size_t p);

/// Default Extra-Trees node settings: round(sqrt(p)) candidates, leaves of 2.
TreeConfig extra_trees_defaults();

void to_json(nlohmann::json& j, const MaxFeatures& m);
void from_json(const nlohmann::json& j, MaxFeatures& m);
void to_json(nlohmann::json& j, const TreeConfig& c);
void from_json(const nlohmann::json& j, TreeConfig& c);
void to_json(nlohmann::json& j, const TreeModel& t);
void from_json(const nlohmann::json& j, TreeModel& t);

namespace detail {

/// Per-feature ascending order of the rows of a matrix (ties by row index).
/// Built once and shared by every tree grown on the same matrix.
class ColumnOrder {
 public:
  explicit ColumnOrder(const Matrix& features);
  std::span<const std::uint32_t> order(std::size_t feature) const { return orders_[feature]; }
  std::size_t n_rows() const { return n_rows_; }

 private:
  std::size_t n_rows_ = 0;
  std::vector<std::vector<std::uint32_t>> orders_;
};

/// Grows one tree on rows of `features` with integer multiplicities
/// `weights` (0 excludes a row; bootstrap draws give counts > 1).
/// `targets` is indexed by row.
TreeModel grow_tree(const Matrix& features, std::span<const double> targets,
                    std::span<const std::uint32_t> weights, const ColumnOrder& order,
                    const TreeConfig& config);

}  // namespace detail

}  // namespace fuelml

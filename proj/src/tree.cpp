#include "fuelml/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fuelml/random.hpp"

namespace fuelml {

std::size_t MaxFeatures::resolve(std::size_t p) const {
  switch (rule) {
    case Rule::all:
      return p;
    case Rule::sqrt:
      return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(p)))));
    case Rule::third:
      return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(p) / 3.0)));
    case Rule::count:
      if (count < 1 || count > p)
        throw std::invalid_argument("candidate feature count " + std::to_string(count) + " not in [1, " +
                                    std::to_string(p) + "]");
      return count;
  }
  return p;
}

void TreeConfig::validate() const {
  if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
  if (min_samples_split < 2) throw std::invalid_argument("min_samples_split must be >= 2");
  if (n_candidate_features.rule == MaxFeatures::Rule::count && n_candidate_features.count < 1)
    throw std::invalid_argument("n_candidate_features must be >= 1");
}

std::size_t TreeModel::depth() const {
  if (nodes.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [idx, d] = stack.back();
    stack.pop_back();
    const auto& node = nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) {
      best = std::max(best, d);
    } else {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return best;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t TreeModel::leaf_index(std::span<const double> row) const {
  if (row.size() != n_features)
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " values, tree expects " +
                                std::to_string(n_features));
  if (nodes.empty()) throw std::logic_error("empty tree");
  std::size_t idx = 0;
  while (!nodes[idx].is_leaf()) {
    const auto& node = nodes[idx];
    idx = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                  : node.right);
  }
  return idx;
}

double predict_tree(const TreeModel& model, std::span<const double> row) {
  return model.nodes[model.leaf_index(row)].value;
}

// ---------------------------------------------------------------------------
// Growing

namespace detail {

ColumnOrder::ColumnOrder(const Matrix& features) : n_rows_(features.rows()), orders_(features.cols()) {
  for (std::size_t f = 0; f < features.cols(); ++f) {
    auto& ord = orders_[f];
    ord.resize(n_rows_);
    std::iota(ord.begin(), ord.end(), std::uint32_t{0});
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return features(a, f) < features(b, f); });
  }
}

namespace {

struct Candidate {
  bool valid = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

// Larger decrease wins; near-equal decreases fall back to the lower feature
// index, then the lower threshold.
bool better(const Candidate& a, const Candidate& b, double tol) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  if (a.decrease > b.decrease + tol) return true;
  if (a.decrease < b.decrease - tol) return false;
  if (a.feature != b.feature) return a.feature < b.feature;
  return a.threshold < b.threshold;
}

double midpoint(double lo, double hi) {
  const double mid = (lo + hi) / 2.0;
  // Adjacent doubles can round the midpoint up to `hi`, which would route
  // `hi` to the left.
  return mid < hi ? mid : lo;
}

class Builder {
 public:
  Builder(const Matrix& features, std::span<const double> targets, std::span<const std::uint32_t> weights,
          const ColumnOrder& order, const TreeConfig& config)
      : targets_(targets),
        weights_(weights),
        config_(config),
        p_(features.cols()),
        k_(config.n_candidate_features.resolve(features.cols())),
        rng_(config.seed),
        columns_(features.cols()),
        orders_(features.cols()),
        goes_left_(features.rows(), 0) {
    for (std::size_t f = 0; f < p_; ++f) {
      columns_[f] = features.column(f);
      const auto full = order.order(f);
      auto& ord = orders_[f];
      ord.reserve(full.size());
      for (auto r : full)
        if (weights_[r] > 0) ord.push_back(r);
    }
    scratch_.resize(orders_.empty() ? 0 : orders_[0].size());
    pool_.resize(p_);
  }

  TreeModel run() {
    if (orders_.empty() || orders_[0].empty()) throw std::invalid_argument("cannot grow a tree on zero rows");
    model_.n_features = p_;
    build(0, orders_[0].size(), 0);
    return std::move(model_);
  }

 private:
  std::int32_t build(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto rows = std::span<const std::uint32_t>(orders_[0]).subspan(begin, end - begin);
    double w_total = 0.0, sum = 0.0;
    double y_min = targets_[rows[0]], y_max = y_min;
    for (auto r : rows) {
      const double w = weights_[r];
      const double y = targets_[r];
      w_total += w;
      sum += w * y;
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
    const double mean = sum / w_total;
    double centered_sum = 0.0, sse = 0.0;
    for (auto r : rows) {
      const double d = targets_[r] - mean;
      centered_sum += weights_[r] * d;
      sse += weights_[r] * d * d;
    }
    const double variance = sse / w_total;

    const auto idx = static_cast<std::int32_t>(model_.nodes.size());
    TreeNode node;
    node.value = mean;
    node.n_samples = static_cast<std::size_t>(w_total);
    model_.nodes.push_back(node);

    const auto n_node = static_cast<std::size_t>(w_total);
    if ((config_.max_depth && depth >= *config_.max_depth) || n_node < config_.min_samples_split ||
        n_node < 2 * config_.min_samples_leaf || y_min == y_max)
      return idx;

    const auto features = pick_features(begin, end);
    const double tol = 1e-10 * variance;
    Candidate best;
    for (auto f : features) {
      if (config_.split_mode == SplitMode::exact)
        scan_exact(f, begin, end, mean, w_total, centered_sum, tol, best);
      else
        score_random(f, begin, end, mean, w_total, centered_sum, tol, best);
    }
    if (!best.valid || !(best.decrease > 0.0)) return idx;

    const std::size_t n_left = partition(best.feature, best.threshold, begin, end);
    auto& stored = model_.nodes[static_cast<std::size_t>(idx)];
    stored.feature = static_cast<std::int32_t>(best.feature);
    stored.threshold = best.threshold;
    stored.impurity_decrease = best.decrease;

    const auto left = build(begin, begin + n_left, depth + 1);
    const auto right = build(begin + n_left, end, depth + 1);
    model_.nodes[static_cast<std::size_t>(idx)].left = left;
    model_.nodes[static_cast<std::size_t>(idx)].right = right;
    return idx;
  }

  // Samples features without replacement until k non-constant ones are
  // found; returns them in ascending index order.
  std::vector<std::size_t> pick_features(std::size_t begin, std::size_t end) {
    std::iota(pool_.begin(), pool_.end(), std::size_t{0});
    std::vector<std::size_t> chosen;
    chosen.reserve(k_);
    for (std::size_t i = 0; i < p_ && chosen.size() < k_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, p_ - 1);
      std::swap(pool_[i], pool_[pick(rng_)]);
      const auto f = pool_[i];
      const auto& col = columns_[f];
      if (col[orders_[f][begin]] < col[orders_[f][end - 1]]) chosen.push_back(f);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  static double decrease_for(double w_left, double s_left, double w_total, double centered_sum) {
    const double w_right = w_total - w_left;
    const double s_right = centered_sum - s_left;
    const double gain = s_left * s_left / w_left + s_right * s_right / w_right - centered_sum * centered_sum / w_total;
    return std::max(0.0, gain / w_total);
  }

  void scan_exact(std::size_t f, std::size_t begin, std::size_t end, double mean, double w_total,
                  double centered_sum, double tol, Candidate& best) const {
    const auto& ord = orders_[f];
    const auto& col = columns_[f];
    const auto min_leaf = static_cast<double>(config_.min_samples_leaf);
    double w_left = 0.0, s_left = 0.0;
    for (std::size_t pos = begin; pos + 1 < end; ++pos) {
      const auto r = ord[pos];
      w_left += weights_[r];
      s_left += weights_[r] * (targets_[r] - mean);
      const double x = col[r];
      const double x_next = col[ord[pos + 1]];
      if (!(x < x_next)) continue;
      if (w_left < min_leaf || w_total - w_left < min_leaf) continue;
      Candidate c{true, f, midpoint(x, x_next), decrease_for(w_left, s_left, w_total, centered_sum)};
      if (better(c, best, tol)) best = c;
    }
  }

  void score_random(std::size_t f, std::size_t begin, std::size_t end, double mean, double w_total,
                    double centered_sum, double tol, Candidate& best) {
    const auto& ord = orders_[f];
    const auto& col = columns_[f];
    const double lo = col[ord[begin]];
    const double hi = col[ord[end - 1]];
    std::uniform_real_distribution<double> draw(lo, hi);
    double threshold = draw(rng_);
    if (!(threshold < hi)) threshold = lo;

    double w_left = 0.0, s_left = 0.0;
    for (std::size_t pos = begin; pos < end && col[ord[pos]] <= threshold; ++pos) {
      const auto r = ord[pos];
      w_left += weights_[r];
      s_left += weights_[r] * (targets_[r] - mean);
    }
    const auto min_leaf = static_cast<double>(config_.min_samples_leaf);
    if (w_left < min_leaf || w_total - w_left < min_leaf) return;
    Candidate c{true, f, threshold, decrease_for(w_left, s_left, w_total, centered_sum)};
    if (better(c, best, tol)) best = c;
  }

  // Stable partition of every feature's order so each keeps its sort within
  // both children. Returns the number of distinct rows going left.
  std::size_t partition(std::size_t feature, double threshold, std::size_t begin, std::size_t end) {
    const auto& col = columns_[feature];
    std::size_t n_left = 0;
    for (std::size_t pos = begin; pos < end; ++pos) {
      const auto r = orders_[feature][pos];
      const bool left = col[r] <= threshold;
      goes_left_[r] = left ? 1 : 0;
      n_left += left ? 1 : 0;
    }
    for (auto& ord : orders_) {
      std::size_t l = begin, s = 0;
      for (std::size_t pos = begin; pos < end; ++pos) {
        const auto r = ord[pos];
        if (goes_left_[r])
          ord[l++] = r;
        else
          scratch_[s++] = r;
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(s), ord.begin() + static_cast<std::ptrdiff_t>(l));
    }
    return n_left;
  }

  std::span<const double> targets_;
  std::span<const std::uint32_t> weights_;
  const TreeConfig& config_;
  std::size_t p_;
  std::size_t k_;
  Rng rng_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::vector<std::uint32_t>> orders_;
  std::vector<std::uint32_t> scratch_;
  std::vector<char> goes_left_;
  std::vector<std::size_t> pool_;
  TreeModel model_;
};

}  // namespace

TreeModel grow_tree(const Matrix& features, std::span<const double> targets, std::span<const std::uint32_t> weights,
                    const ColumnOrder& order, const TreeConfig& config) {
  config.validate();
  if (targets.size() != features.rows() || weights.size() != features.rows() || order.n_rows() != features.rows())
    throw std::invalid_argument("grow_tree: row count mismatch");
  return Builder(features, targets, weights, order, config).run();
}

}  // namespace detail

TreeModel fit_tree(const Dataset& data, const TreeConfig& config) {
  if (data.n() == 0) throw std::invalid_argument("cannot fit a tree on an empty dataset");
  const detail::ColumnOrder order(data.features);
  const std::vector<std::uint32_t> weights(data.n(), 1);
  return detail::grow_tree(data.features, data.target, weights, order, config);
}

std::vector<TreeModel> fit_extra_trees(const Dataset& data, std::size_t n_trees, const TreeConfig& config) {
  if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  if (config.split_mode != SplitMode::random_threshold)
    throw std::invalid_argument("extra trees require random_threshold split mode");
  if (data.n() == 0) throw std::invalid_argument("cannot fit trees on an empty dataset");
  const detail::ColumnOrder order(data.features);
  const std::vector<std::uint32_t> weights(data.n(), 1);
  std::vector<TreeModel> trees;
  trees.reserve(n_trees);
  for (std::size_t i = 0; i < n_trees; ++i) {
    TreeConfig tree_config = config;
    tree_config.seed = derive_seed(config.seed, i);
    trees.push_back(detail::grow_tree(data.features, data.target, weights, order, tree_config));
  }
  return trees;
}

std::vector<double> feature_importance(std::span<const TreeModel> trees, std::size_t p) {
  if (trees.empty()) throw std::invalid_argument("feature_importance needs at least one tree");
  std::vector<double> scores(p, 0.0);
  for (const auto& tree : trees) {
    if (tree.nodes.empty()) continue;
    const auto root = static_cast<double>(tree.nodes[0].n_samples);
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      const auto f = static_cast<std::size_t>(node.feature);
      if (f >= p) throw std::invalid_argument("tree splits on a feature outside [0, p)");
      scores[f] += static_cast<double>(node.n_samples) / root * node.impurity_decrease;
    }
  }
  for (auto& s : scores) s /= static_cast<double>(trees.size());
  const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
  if (total > 0.0)
    for (auto& s : scores) s /= total;
  return scores;
}

TreeConfig extra_trees_defaults() {
  TreeConfig c;
  c.split_mode = SplitMode::random_threshold;
  c.n_candidate_features = MaxFeatures::sqrt();
  c.min_samples_leaf = 2;
  return c;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const MaxFeatures& m) {
  switch (m.rule) {
    case MaxFeatures::Rule::all: j = "all"; break;
    case MaxFeatures::Rule::sqrt: j = "sqrt"; break;
    case MaxFeatures::Rule::third: j = "third"; break;
    case MaxFeatures::Rule::count: j = m.count; break;
  }
}

void from_json(const nlohmann::json& j, MaxFeatures& m) {
  if (j.is_number_unsigned() || j.is_number_integer()) {
    m = MaxFeatures::fixed(j.get<std::size_t>());
    return;
  }
  const auto s = j.get<std::string>();
  if (s == "all")
    m = MaxFeatures::all();
  else if (s == "sqrt")
    m = MaxFeatures::sqrt();
  else if (s == "third")
    m = MaxFeatures::third();
  else
    throw std::invalid_argument("unknown feature-count rule '" + s + "'");
}

void to_json(nlohmann::json& j, const TreeConfig& c) {
  j = {{"max_depth", c.max_depth ? nlohmann::json(*c.max_depth) : nlohmann::json(nullptr)},
       {"min_samples_leaf", c.min_samples_leaf},
       {"min_samples_split", c.min_samples_split},
       {"split_mode", c.split_mode == SplitMode::exact ? "exact" : "random_threshold"},
       {"n_candidate_features", c.n_candidate_features},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TreeConfig& c) {
  const auto& depth = j.at("max_depth");
  c.max_depth = depth.is_null() ? std::nullopt : std::optional<std::size_t>(depth.get<std::size_t>());
  j.at("min_samples_leaf").get_to(c.min_samples_leaf);
  j.at("min_samples_split").get_to(c.min_samples_split);
  const auto mode = j.at("split_mode").get<std::string>();
  if (mode == "exact")
    c.split_mode = SplitMode::exact;
  else if (mode == "random_threshold")
    c.split_mode = SplitMode::random_threshold;
  else
    throw std::invalid_argument("unknown split_mode '" + mode + "'");
  j.at("n_candidate_features").get_to(c.n_candidate_features);
  j.at("seed").get_to(c.seed);
}

namespace {

nlohmann::json node_to_json(const TreeModel& t, std::size_t idx) {
  const auto& node = t.nodes[idx];
  if (node.is_leaf()) return {{"value", node.value}, {"n_samples", node.n_samples}};
  return {{"feature", node.feature},
          {"threshold", node.threshold},
          {"value", node.value},
          {"n_samples", node.n_samples},
          {"impurity_decrease", node.impurity_decrease},
          {"left", node_to_json(t, static_cast<std::size_t>(node.left))},
          {"right", node_to_json(t, static_cast<std::size_t>(node.right))}};
}

std::int32_t node_from_json(const nlohmann::json& j, TreeModel& t) {
  const auto idx = static_cast<std::int32_t>(t.nodes.size());
  t.nodes.emplace_back();
  TreeNode node;
  j.at("value").get_to(node.value);
  j.at("n_samples").get_to(node.n_samples);
  if (j.contains("feature")) {
    j.at("feature").get_to(node.feature);
    j.at("threshold").get_to(node.threshold);
    j.at("impurity_decrease").get_to(node.impurity_decrease);
    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= t.n_features)
      throw std::invalid_argument("tree node feature index out of range");
    node.left = node_from_json(j.at("left"), t);
    node.right = node_from_json(j.at("right"), t);
  }
  t.nodes[static_cast<std::size_t>(idx)] = node;
  return idx;
}

}  // namespace

void to_json(nlohmann::json& j, const TreeModel& t) {
  j = {{"n_features", t.n_features}, {"root", t.nodes.empty() ? nlohmann::json(nullptr) : node_to_json(t, 0)}};
}

void from_json(const nlohmann::json& j, TreeModel& t) {
  t = TreeModel{};
  j.at("n_features").get_to(t.n_features);
  const auto& root = j.at("root");
  if (!root.is_null()) node_from_json(root, t);
}

}  // namespace fuelml

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <map>
#include <mutex>
#include <set>

#include "fuelml/cv.hpp"
#include "fuelml/learners.hpp"
#include "fuelml/metrics.hpp"
#include "testing.hpp"

using namespace fuelml;
using namespace fuelml::testing;

namespace {

PredictionSet random_ps(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> n_dist(2, 500);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t n = n_dist(rng);
  PredictionSet ps;
  const double scale = std::exp(3.0 * z(rng)), offset = 100.0 * z(rng);
  for (std::size_t i = 0; i < n; ++i) {
    ps.observed.push_back(offset + scale * z(rng));
    ps.estimated.push_back(ps.observed.back() + scale * 0.5 * z(rng) + 0.1 * scale);
  }
  if (ps.observed[0] == ps.observed[1]) ps.observed[1] += 1.0;
  return ps;
}

Learner leak_learner(const Dataset& full) {
  return [&full](const Dataset&, std::uint64_t) {
    return Fitted{[&full](std::span<const double> row) {
                    for (std::size_t i = 0; i < full.n(); ++i)
                      if (std::equal(row.begin(), row.end(), full.features.row(i).begin())) return full.target[i];
                    return 0.0;
                  },
                  {}};
  };
}

std::vector<CvPlan> all_schemes(std::size_t k, std::uint64_t seed) {
  return {CvPlan::holdout(0.3, seed), CvPlan::kfold(k, seed), CvPlan::loocv(seed), CvPlan::repeated_kfold(k, 3, seed)};
}

}  // namespace

TEST_CASE("hand-evaluated metrics") {
  const PredictionSet ps{{1, 2, 3}, {1, 2, 2}};
  CHECK(std::abs(nse(ps) - 0.5) < 1e-12);
  CHECK(std::abs(bias(ps) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(mae(ps) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(rmse(ps) - std::sqrt(1.0 / 3.0)) < 1e-12);
  CHECK(std::abs(rsr(ps) - std::sqrt(0.5)) < 1e-12);
  const MetricsReport r = metrics_report(ps);
  CHECK(*r.nse == nse(ps));
  CHECK(*r.r2 == *r.nse);
  CHECK(*r.rsr == rsr(ps));

  CHECK(bias(PredictionSet{{2, 4}, {1, 3}}) == 1.0);
  CHECK(bias(PredictionSet{{0, 0}, {1, -1}}) == 0.0);
  CHECK(mae(PredictionSet{{0, 0}, {1, -1}}) == 1.0);
}

TEST_CASE("perfect and mean predictions") {
  const PredictionSet perfect{{3, 1, 4, 1, 5}, {3, 1, 4, 1, 5}};
  const MetricsReport r = metrics_report(perfect);
  CHECK(*r.nse == 1.0);
  CHECK(r.bias == 0.0);
  CHECK(r.mae == 0.0);
  CHECK(r.rmse == 0.0);
  CHECK(*r.rsr == 0.0);
  CHECK(*r.r2 == 1.0);

  const PredictionSet mean_ps{{1, 2, 3, 6}, {3, 3, 3, 3}};
  CHECK(nse(mean_ps) == 0.0);
  CHECK(rsr(mean_ps) == 1.0);
}

TEST_CASE("metric errors and undefined policy") {
  const PredictionSet flat{{2, 2, 2}, {1, 2, 3}};
  CHECK_THROWS_AS(nse(flat), std::domain_error);
  CHECK_THROWS_AS(rsr(flat), std::domain_error);
  const MetricsReport r = metrics_report(flat);
  CHECK_FALSE(r.nse.has_value());
  CHECK_FALSE(r.rsr.has_value());
  CHECK(r.mae == doctest::Approx(2.0 / 3.0));
  const nlohmann::json j = r;
  CHECK(j["nse"].is_null());
  CHECK_THROWS(bias(PredictionSet{{1, 2}, {1}}));
  CHECK_THROWS(mae(PredictionSet{{1, NAN}, {1, 2}}));
  CHECK_THROWS(rmse(PredictionSet{{}, {}}));
}

TEST_CASE("report JSON keeps the digits") {
  MetricsReport r;
  r.nse = 0.991;
  r.r2 = 0.991;
  const std::string s = nlohmann::json(r).dump();
  CHECK(s.find("0.991") != std::string::npos);
  for (const char* key : {"\"nse\"", "\"bias\"", "\"mae\"", "\"rmse\"", "\"rsr\"", "\"r2\""})
    CHECK(s.find(key) != std::string::npos);
}

TEST_CASE("metric identities over random prediction sets") {
  std::mt19937_64 rng(1000);
  for (int trial = 0; trial < 1000; ++trial) {
    const PredictionSet ps = random_ps(rng);
    const double n = nse(ps), r = rsr(ps);
    CHECK(std::abs(r * r + n - 1.0) < 1e-12);
    CHECK(rmse(ps) >= mae(ps));
    CHECK(mae(ps) >= std::abs(bias(ps)));
    CHECK(n <= 1.0);
    CHECK(r >= 0.0);

    PredictionSet shifted = ps;
    for (auto& v : shifted.observed) v += 3.0;
    for (auto& v : shifted.estimated) v += 3.0;
    CHECK(std::abs(nse(shifted) - n) < 1e-9);
    CHECK(std::abs(rmse(shifted) - rmse(ps)) < 1e-9 * std::max(1.0, rmse(ps)));
    CHECK(std::abs(mae(shifted) - mae(ps)) < 1e-9 * std::max(1.0, mae(ps)));
  }
}

TEST_CASE("residual table") {
  const auto rows = residual_table(PredictionSet{{2, 4}, {1, 3}});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].residual == 1.0);
  CHECK(rows[1].residual == 1.0);
  const std::string csv = residual_csv(rows);
  CHECK(csv.rfind("observed,predicted,residual\n", 0) == 0);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const PredictionSet ps = random_ps(rng);
    const auto t = residual_table(ps);
    CHECK(t.size() == ps.observed.size());
    double mean = 0.0;
    for (const auto& r : t) mean += r.residual / static_cast<double>(t.size());
    CHECK(std::abs(mean - bias(ps)) < 1e-12 * std::max(1.0, mae(ps)));
  }
  const auto perfect = residual_table(PredictionSet{{1, 2, 3}, {1, 2, 3}});
  for (const auto& r : perfect) CHECK(r.residual == 0.0);
}

TEST_CASE("fold examples") {
  const auto k3 = make_folds(6, CvPlan::kfold(3, 9));
  REQUIRE(k3.size() == 3);
  std::set<std::size_t> seen;
  for (const auto& f : k3) {
    CHECK(f.test.size() == 2);
    seen.insert(f.test.begin(), f.test.end());
  }
  CHECK(seen.size() == 6);

  const auto loo = make_folds(5, CvPlan::loocv(1));
  REQUIRE(loo.size() == 5);
  std::set<std::size_t> singles;
  for (const auto& f : loo) {
    CHECK(f.test.size() == 1);
    singles.insert(f.test[0]);
  }
  CHECK(singles.size() == 5);

  const auto rep = make_folds(6, CvPlan::repeated_kfold(3, 2, 4));
  REQUIRE(rep.size() == 6);
  std::vector<std::size_t> first, second;
  for (const auto& f : rep) (f.repeat == 0 ? first : second).insert((f.repeat == 0 ? first : second).end(), f.test.begin(), f.test.end());
  CHECK(first != second);

  CHECK_THROWS(make_folds(5, CvPlan::kfold(6, 1)));
  CHECK_THROWS(make_folds(5, CvPlan::kfold(1, 1)));
  CHECK_THROWS(make_folds(5, CvPlan::repeated_kfold(2, 0, 1)));
}

TEST_CASE("folds partition the index set for every scheme") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> n_dist(2, 120);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = n_dist(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(2, n)(rng);
    for (const auto& plan : all_schemes(k, rng())) {
      const auto splits = make_folds(n, plan);
      CHECK(splits.size() == plan.split_count(n));
      std::map<std::size_t, std::vector<std::size_t>> tests_per_repeat;
      for (const auto& s : splits) {
        std::vector<std::size_t> both = s.train;
        both.insert(both.end(), s.test.begin(), s.test.end());
        std::sort(both.begin(), both.end());
        bool exhaustive = both.size() == n;
        for (std::size_t i = 0; exhaustive && i < n; ++i) exhaustive = both[i] == i;
        CHECK(exhaustive);
        auto& t = tests_per_repeat[s.repeat];
        t.insert(t.end(), s.test.begin(), s.test.end());
      }
      if (plan.scheme == CvPlan::Scheme::holdout) continue;
      for (auto& [r, t] : tests_per_repeat) {
        std::sort(t.begin(), t.end());
        bool partition = t.size() == n;
        for (std::size_t i = 0; partition && i < n; ++i) partition = t[i] == i;
        CHECK(partition);
      }
      if (plan.scheme == CvPlan::Scheme::kfold) {
        std::size_t lo = n, hi = 0;
        for (const auto& s : splits) {
          lo = std::min(lo, s.test.size());
          hi = std::max(hi, s.test.size());
        }
        CHECK(hi - lo <= 1);
        CHECK(splits.front().test.size() == hi);
      }
    }
  }
}

TEST_CASE("leak learner is perfect and the mean baseline is not") {
  const Dataset d = synth_fuel(SynthConfig{300, 2, 0.05, 5});
  LearnerSpec mean_spec;
  mean_spec.kind = ModelKind::mean;
  for (const auto& plan : {CvPlan::holdout(0.25, 3), CvPlan::kfold(5, 3), CvPlan::repeated_kfold(4, 2, 3)}) {
    const CvResult leak = cross_validate(leak_learner(d), d, plan, 1);
    for (const auto& f : leak.folds) CHECK(*f.nse == 1.0);
    const CvResult base = cross_validate(make_learner(mean_spec), d, plan, 1);
    CHECK(*base.nse.mean <= 0.1);
    for (const auto& f : base.folds) CHECK(*f.nse <= 0.1);
  }
}

TEST_CASE("mean baseline scores exactly zero when train and test means agree") {
  const Dataset d = make_dataset({{0}, {1}, {2}, {3}}, {1, 3, 3, 1});
  LearnerSpec spec;
  spec.kind = ModelKind::mean;
  const CvResult r = cross_validate(make_learner(spec), d, CvPlan::kfold(2, 0), 1);
  for (std::size_t s = 0; s < r.splits.size(); ++s) {
    double train_mean = 0.0, test_mean = 0.0;
    for (auto i : r.splits[s].train) train_mean += d.target[i] / 2.0;
    for (auto i : r.splits[s].test) test_mean += d.target[i] / 2.0;
    if (train_mean == test_mean && r.folds[s].nse) CHECK(*r.folds[s].nse == 0.0);
  }
}

TEST_CASE("zero-variance folds are excluded and counted") {
  const Dataset d = make_dataset({{0}, {1}, {2}, {3}, {4}, {5}}, {1, 1, 1, 1, 1, 2});
  LearnerSpec spec;
  spec.kind = ModelKind::mean;
  const CvResult r = cross_validate(make_learner(spec), d, CvPlan::loocv(0), 1);
  CHECK(r.folds.size() == 6);
  CHECK(r.excluded == 6);
  CHECK_FALSE(r.nse.mean.has_value());
  CHECK(r.nse.count == 0);
  CHECK(r.mae.count == 6);
  CHECK(r.pooled.nse.has_value());
}

TEST_CASE("summaries are recomputable from folds and thread count does not matter") {
  const Dataset d = synth_fuel(SynthConfig{400, 2, 0.05, 8});
  LearnerSpec spec;
  spec.kind = ModelKind::gbm;
  spec.gbm.n_stages = 20;
  const CvPlan plan = CvPlan::repeated_kfold(5, 2, 6);
  const CvResult a = cross_validate(make_learner(spec), d, plan, 1);
  const CvResult b = cross_validate(make_learner(spec), d, plan, 4);
  CHECK(nlohmann::json(a) == nlohmann::json(b));
  CHECK(a.folds.size() == 10);
  double mean = 0.0;
  for (const auto& f : a.folds) mean += *f.nse / 10.0;
  double var = 0.0;
  for (const auto& f : a.folds) var += (*f.nse - mean) * (*f.nse - mean) / 10.0;
  CHECK(std::abs(*a.nse.mean - mean) < 1e-12);
  CHECK(std::abs(*a.nse.std - std::sqrt(var)) < 1e-12);
}

TEST_CASE("fold learners see only training rows") {
  const Dataset d = synth_fuel(SynthConfig{50, 1, 0.05, 2});
  const CvPlan plan = CvPlan::kfold(5, 1);
  const auto splits = make_folds(d.n(), plan);
  std::vector<std::size_t> sizes;
  std::mutex mu;
  const Learner spy = [&](const Dataset& train, std::uint64_t) {
    std::lock_guard lock(mu);
    sizes.push_back(train.n());
    return Fitted{[](std::span<const double>) { return 0.0; }, {}};
  };
  cross_validate(spy, d, plan, 1);
  for (auto s : sizes) CHECK(s == 40);
}

TEST_CASE("learning curve") {
  const Dataset d = synth_fuel(SynthConfig{200, 1, 0.05, 3});
  LearnerSpec tree;
  tree.kind = ModelKind::tree;
  const std::vector<std::size_t> sizes{10, 40, 80, 160};
  const CvPlan plan = CvPlan::kfold(5, 2);
  const auto points = learning_curve(make_learner(tree), d, sizes, plan, 1);
  REQUIRE(points.size() == 4);
  for (const auto& p : points) CHECK(*p.train_nse == 1.0);

  LearnerSpec gbm;
  gbm.kind = ModelKind::gbm;
  gbm.gbm.n_stages = 10;
  const auto a = learning_curve(make_learner(gbm), d, sizes, plan, 1);
  const auto b = learning_curve(make_learner(gbm), d, sizes, plan, 3);
  CHECK(learning_curve_csv(a) == learning_curve_csv(b));
  CHECK(learning_curve_csv(a).rfind("size,train_nse,cv_nse\n", 0) == 0);

  const std::vector<std::size_t> too_big{161};
  CHECK_THROWS(learning_curve(make_learner(tree), d, too_big, plan, 1));
  const std::vector<std::size_t> unordered{40, 10};
  CHECK_THROWS(learning_curve(make_learner(tree), d, unordered, plan, 1));
}

TEST_CASE("parallel_for rethrows worker errors") {
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fuelml/dataset.hpp"
#include "testing.hpp"

using namespace fuelml;
using namespace fuelml::testing;

TEST_CASE("load_csv parses a small file") {
  TempDir dir("csv");
  write_file(dir / "a.csv", "hours,rate,fuel\n1,2,2\n3,4,12\n5,6,30\n");
  const auto load = load_csv(dir / "a.csv", "fuel");
  CHECK(load.dataset.n() == 3);
  CHECK(load.dataset.p() == 2);
  CHECK(load.dropped_rows == 0);
  CHECK(load.dataset.feature_names == std::vector<std::string>{"hours", "rate"});
  CHECK(load.dataset.target == std::vector<double>{2, 12, 30});
  CHECK(load.dataset.features(2, 1) == 6.0);
}

TEST_CASE("load_csv drops rows with blank or bad cells") {
  TempDir dir("csv");
  write_file(dir / "a.csv", "hours,rate,fuel\n1,2,2\n3,,12\n5,6,30\n");
  auto load = load_csv(dir / "a.csv", "fuel");
  CHECK(load.dataset.n() == 2);
  CHECK(load.dropped_rows == 1);

  write_file(dir / "b.csv", "hours,rate,fuel\n1,2,2\n3,abc,12\n5,6,nan\n7,8,9\n");
  load = load_csv(dir / "b.csv", "fuel");
  CHECK(load.dataset.n() == 2);
  CHECK(load.dropped_rows == 2);
}

TEST_CASE("load_csv errors") {
  TempDir dir("csv");
  write_file(dir / "a.csv", "hours,rate,fuel\n1,2,2\n");
  CHECK_THROWS(load_csv(dir / "a.csv", "missing_col"));
  CHECK_THROWS(load_csv(dir / "nope.csv", "fuel"));
  write_file(dir / "b.csv", "hours,fuel\n,2\nx,3\n");
  CHECK_THROWS(load_csv(dir / "b.csv", "fuel"));
  write_file(dir / "c.csv", "fuel\n1\n2\n");
  CHECK_THROWS(load_csv(dir / "c.csv", "fuel"));
}

TEST_CASE("csv round trip keeps full precision") {
  std::mt19937_64 rng(3);
  const Dataset d = random_dataset(rng, 40, 3);
  TempDir dir("csv");
  write_file(dir / "d.csv", dataset_to_csv(d, "comment line"));
  const auto load = load_csv(dir / "d.csv", "y");
  CHECK(load.dataset == d);
  CHECK(fingerprint(load.dataset) == fingerprint(d));
}

TEST_CASE("synth_fuel is deterministic and seed-sensitive") {
  SynthConfig c;
  c.n_rows = 100;
  c.seed = 1;
  const Dataset a = synth_fuel(c), b = synth_fuel(c);
  CHECK(a == b);
  c.seed = 2;
  const Dataset other = synth_fuel(c);
  CHECK_FALSE(other.features == a.features);
  CHECK(a.p() == 4 + c.n_noise_features);
  CHECK(a.target_name == "fuel_l");
}

TEST_CASE("synth_fuel columns follow the generator rules") {
  SynthConfig c;
  c.n_rows = 2000;
  c.seed = 9;
  const Dataset d = synth_fuel(c);
  const std::set<double> caps(std::begin(kCapacityKva), std::end(kCapacityKva));
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double hours = d.features(i, 0), cap = d.features(i, 1), rate = d.features(i, 2), days = d.features(i, 3);
    CHECK(hours >= 0.0);
    CHECK(hours < kMaxRunningHours);
    REQUIRE(caps.count(cap) == 1);
    const auto cls = std::find(std::begin(kCapacityKva), std::end(kCapacityKva), cap) - std::begin(kCapacityKva);
    CHECK(rate >= kBaseRateLph[cls] * (1 - kRateJitter) - 1e-12);
    CHECK(rate <= kBaseRateLph[cls] * (1 + kRateJitter) + 1e-12);
    CHECK(days == std::round(hours / 24.0));
    CHECK(d.target[i] >= 0.0);
  }
}

TEST_CASE("synth_fuel with zero noise is exactly rate times hours") {
  SynthConfig c;
  c.n_rows = 500;
  c.noise_sigma = 0.0;
  c.seed = 4;
  const Dataset d = synth_fuel(c);
  for (std::size_t i = 0; i < d.n(); ++i) CHECK(d.target[i] - d.features(i, 2) * d.features(i, 0) == 0.0);
}

TEST_CASE("synth_fuel target mean matches the generator's expectation") {
  // E[fuel] = E[rate] E[hours] since the draws are independent and E[eps] = 0.
  double mean_rate = 0.0;
  for (double r : kBaseRateLph) mean_rate += r / 4.0;
  const double expected = mean_rate * kMaxRunningHours / 2.0;

  const Dataset d = synth_fuel(SynthConfig{6000, 5, 0.05, 42});
  double mean = 0.0;
  for (double y : d.target) mean += y / static_cast<double>(d.n());
  CHECK(std::abs(mean - expected) <= 0.1 * expected);
}

TEST_CASE("standardize centers and scales") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Dataset d = random_dataset(rng, 5 + trial, 3);
    for (std::size_t i = 0; i < d.n(); ++i) d.features(i, 1) = d.features(i, 1) * 1e3 + 250.0;
    const auto [s, params] = standardize(d);
    CHECK(s.target == d.target);
    for (std::size_t j = 0; j < d.p(); ++j) {
      const auto col = s.features.column(j);
      double mean = 0.0, ss = 0.0;
      for (double v : col) mean += v / static_cast<double>(col.size());
      for (double v : col) ss += (v - mean) * (v - mean) / static_cast<double>(col.size());
      CHECK(std::abs(mean) < 1e-12);
      CHECK(std::abs(std::sqrt(ss) - 1.0) < 1e-12);
    }
    const Matrix back = params.invert(s.features);
    for (std::size_t i = 0; i < d.n(); ++i)
      for (std::size_t j = 0; j < d.p(); ++j)
        CHECK(std::abs(back(i, j) - d.features(i, j)) <= 1e-12 * std::max(1.0, std::abs(d.features(i, j))));
  }
}

TEST_CASE("standardize leaves constant columns centered with unit scale") {
  const Dataset d = make_dataset({{3, 1}, {3, 2}, {3, 4}}, {1, 2, 3});
  const auto [s, params] = standardize(d);
  CHECK(params.scales[0] == 1.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s.features(i, 0) == 0.0);
  for (double sc : params.scales) CHECK(sc > 0.0);
}

TEST_CASE("split_holdout sizes and determinism") {
  const Split s = holdout_split(10, 0.3, 5);
  CHECK(s.train.size() == 7);
  CHECK(s.test.size() == 3);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);
  const Split again = holdout_split(10, 0.3, 5);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  CHECK_THROWS(holdout_split(1, 0.3, 5));

  const Dataset d = make_dataset({{0}, {1}, {2}, {3}}, {0, 1, 2, 3});
  const auto [train, test] = split_holdout(d, 0.5, 1);
  CHECK(train.n() == 2);
  CHECK(test.n() == 2);
}

TEST_CASE("split_holdout partitions for random cases") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> n_dist(2, 300);
  std::uniform_real_distribution<double> f_dist(0.001, 0.999);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = n_dist(rng);
    const double f = f_dist(rng);
    const Split s = holdout_split(n, f, rng());
    CHECK(!s.train.empty());
    CHECK(!s.test.empty());
    std::vector<std::size_t> all = s.train;
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    bool ok = all.size() == n;
    for (std::size_t i = 0; ok && i < n; ++i) ok = all[i] == i;
    CHECK(ok);
  }
}

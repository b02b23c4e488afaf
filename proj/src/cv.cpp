#include "fuelml/cv.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fuelml/random.hpp"

namespace fuelml {

CvPlan CvPlan::holdout(double test_fraction, std::uint64_t seed) {
  CvPlan p;
  p.scheme = Scheme::holdout;
  p.test_fraction = test_fraction;
  p.seed = seed;
  return p;
}

CvPlan CvPlan::kfold(std::size_t k, std::uint64_t seed) {
  CvPlan p;
  p.scheme = Scheme::kfold;
  p.k = k;
  p.seed = seed;
  return p;
}

CvPlan CvPlan::loocv(std::uint64_t seed) {
  CvPlan p;
  p.scheme = Scheme::loocv;
  p.seed = seed;
  return p;
}

CvPlan CvPlan::repeated_kfold(std::size_t k, std::size_t repeats, std::uint64_t seed) {
  CvPlan p;
  p.scheme = Scheme::repeated_kfold;
  p.k = k;
  p.repeats = repeats;
  p.seed = seed;
  return p;
}

void CvPlan::validate(std::size_t n) const {
  if (n < 2) throw std::invalid_argument("cross-validation needs at least 2 rows");
  switch (scheme) {
    case Scheme::holdout:
      if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must lie in (0, 1)");
      break;
    case Scheme::repeated_kfold:
      if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
      [[fallthrough]];
    case Scheme::kfold:
      if (k < 2) throw std::invalid_argument("K must be >= 2");
      if (k > n) throw std::invalid_argument("K=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
      break;
    case Scheme::loocv:
      break;
  }
}

std::size_t CvPlan::split_count(std::size_t n) const {
  switch (scheme) {
    case Scheme::holdout: return 1;
    case Scheme::kfold: return k;
    case Scheme::loocv: return n;
    case Scheme::repeated_kfold: return k * repeats;
  }
  return 0;
}

namespace {

void append_kfold(const std::vector<std::size_t>& order, std::size_t k, std::size_t repeat,
                  std::vector<FoldSplit>& out) {
  const std::size_t n = order.size();
  const std::size_t base = n / k, extra = n % k;
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    FoldSplit split;
    split.repeat = repeat;
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                      order.begin() + static_cast<std::ptrdiff_t>(start + size));
    split.train.reserve(n - size);
    split.train.insert(split.train.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(start));
    split.train.insert(split.train.end(), order.begin() + static_cast<std::ptrdiff_t>(start + size), order.end());
    out.push_back(std::move(split));
    start += size;
  }
}

}  // namespace

std::vector<FoldSplit> make_folds(std::size_t n, const CvPlan& plan) {
  plan.validate(n);
  std::vector<FoldSplit> out;
  switch (plan.scheme) {
    case CvPlan::Scheme::holdout: {
      Split s = holdout_split(n, plan.test_fraction, plan.seed);
      out.push_back({std::move(s.train), std::move(s.test), 0});
      break;
    }
    case CvPlan::Scheme::kfold:
      append_kfold(shuffled_indices(n, plan.seed), plan.k, 0, out);
      break;
    case CvPlan::Scheme::loocv:
      append_kfold(shuffled_indices(n, plan.seed), n, 0, out);
      break;
    case CvPlan::Scheme::repeated_kfold:
      for (std::size_t r = 0; r < plan.repeats; ++r)
        append_kfold(shuffled_indices(n, derive_seed(plan.seed, r)), plan.k, r, out);
      break;
  }
  return out;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  s.mean = mean;
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

std::vector<double> predict_rows(const Predictor& predict, const Dataset& data, std::span<const std::size_t> rows) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = predict(data.features.row(rows[i]));
  return out;
}

PredictionSet gather(const Dataset& data, std::span<const std::size_t> rows, std::vector<double> estimates) {
  PredictionSet ps;
  ps.observed.reserve(rows.size());
  for (auto r : rows) ps.observed.push_back(data.target[r]);
  ps.estimated = std::move(estimates);
  return ps;
}

}  // namespace

CvResult cross_validate(const Learner& learner, const Dataset& data, const CvPlan& plan, std::size_t threads) {
  data.validate();
  CvResult result;
  result.splits = make_folds(data.n(), plan);
  const std::size_t n_splits = result.splits.size();
  result.folds.resize(n_splits);
  result.test_predictions.resize(n_splits);
  result.fold_info.resize(n_splits);

  parallel_for(n_splits, threads, [&](std::size_t s) {
    const auto& split = result.splits[s];
    const Dataset train = data.subset(split.train);
    Fitted fitted = learner(train, derive_seed(plan.seed, s));
    auto estimates = predict_rows(fitted.predict, data, split.test);
    result.folds[s] = metrics_report(gather(data, split.test, estimates));
    result.test_predictions[s] = std::move(estimates);
    result.fold_info[s] = std::move(fitted.info);
  });

  std::vector<double> nse, bias, mae, rmse, rsr, r2;
  for (const auto& f : result.folds) {
    bias.push_back(f.bias);
    mae.push_back(f.mae);
    rmse.push_back(f.rmse);
    if (!f.nse) {
      ++result.excluded;
      continue;
    }
    nse.push_back(*f.nse);
    rsr.push_back(*f.rsr);
    r2.push_back(*f.r2);
  }
  result.nse = summarize(nse);
  result.bias = summarize(bias);
  result.mae = summarize(mae);
  result.rmse = summarize(rmse);
  result.rsr = summarize(rsr);
  result.r2 = summarize(r2);

  PredictionSet pooled;
  for (std::size_t s = 0; s < n_splits; ++s)
    for (std::size_t i = 0; i < result.splits[s].test.size(); ++i) {
      pooled.observed.push_back(data.target[result.splits[s].test[i]]);
      pooled.estimated.push_back(result.test_predictions[s][i]);
    }
  result.pooled = metrics_report(pooled);
  return result;
}

std::vector<CurvePoint> learning_curve(const Learner& learner, const Dataset& data, std::span<const std::size_t> sizes,
                                       const CvPlan& plan, std::size_t threads) {
  data.validate();
  const auto splits = make_folds(data.n(), plan);
  std::size_t max_train = data.n();
  for (const auto& s : splits) max_train = std::min(max_train, s.train.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) throw std::invalid_argument("learning-curve sizes must be >= 1");
    if (sizes[i] > max_train)
      throw std::invalid_argument("learning-curve size " + std::to_string(sizes[i]) + " exceeds the " +
                                  std::to_string(max_train) + " training rows available per split");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw std::invalid_argument("learning-curve sizes must be increasing");
  }

  const std::size_t n_jobs = sizes.size() * splits.size();
  std::vector<std::optional<double>> train_scores(n_jobs), test_scores(n_jobs);
  parallel_for(n_jobs, threads, [&](std::size_t job) {
    const std::size_t size_idx = job / splits.size();
    const std::size_t s = job % splits.size();
    const auto& split = splits[s];
    const auto rows = std::span<const std::size_t>(split.train).first(sizes[size_idx]);
    const Dataset train = data.subset(rows);
    const Fitted fitted = learner(train, derive_seed(plan.seed, s));
    train_scores[job] = metrics_report(gather(data, rows, predict_rows(fitted.predict, data, rows))).nse;
    test_scores[job] = metrics_report(gather(data, split.test, predict_rows(fitted.predict, data, split.test))).nse;
  });

  std::vector<CurvePoint> points;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::vector<double> tr, te;
    for (std::size_t s = 0; s < splits.size(); ++s) {
      const std::size_t job = i * splits.size() + s;
      if (train_scores[job]) tr.push_back(*train_scores[job]);
      if (test_scores[job]) te.push_back(*test_scores[job]);
    }
    points.push_back({sizes[i], summarize(tr).mean, summarize(te).mean});
  }
  return points;
}

std::string learning_curve_csv(const std::vector<CurvePoint>& points, const std::string& comment) {
  std::ostringstream out;
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "size,train_nse,cv_nse\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; };
  for (const auto& p : points) out << p.size << ',' << cell(p.train_nse) << ',' << cell(p.cv_nse) << '\n';
  return out.str();
}

void to_json(nlohmann::json& j, const CvPlan& p) {
  static const char* names[] = {"holdout", "kfold", "loocv", "repeated_kfold"};
  j = {{"scheme", names[static_cast<int>(p.scheme)]}, {"seed", p.seed}};
  switch (p.scheme) {
    case CvPlan::Scheme::holdout: j["test_fraction"] = p.test_fraction; break;
    case CvPlan::Scheme::repeated_kfold: j["repeats"] = p.repeats; [[fallthrough]];
    case CvPlan::Scheme::kfold: j["k"] = p.k; break;
    case CvPlan::Scheme::loocv: break;
  }
}

void to_json(nlohmann::json& j, const MetricSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j = {{"mean", opt(s.mean)}, {"std", opt(s.std)}, {"count", s.count}};
}

void to_json(nlohmann::json& j, const CvResult& r) {
  j = {{"folds", r.folds}, {"nse", r.nse},   {"bias", r.bias},         {"mae", r.mae},
       {"rmse", r.rmse},   {"rsr", r.rsr},   {"r2", r.r2},             {"excluded", r.excluded},
       {"pooled", r.pooled}};
}

}  // namespace fuelml

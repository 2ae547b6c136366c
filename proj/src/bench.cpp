#include "tmsk/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <thread>
#include <tuple>

#include "tmsk/errors.hpp"
#include "tmsk/kriging.hpp"

namespace tmsk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum Role : std::uint64_t { kDesign = 1, kSimulation = 2, kPrediction = 3 };

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentRow run_one(const ExperimentConfig& cfg, std::size_t budget, std::size_t rep) {
  using clock = std::chrono::steady_clock;
  ExperimentRow row;
  row.budget = budget;
  row.rep = rep;
  row.rmse = kNaN;

  const TestFunction f(cfg.function, cfg.dim, cfg.griewank_constant);
  const DomainMap domain = f.domain();
  const TMKernel tm = parse_kernel_spec(cfg.kernel, cfg.dim);
  auto grid = truncated_sg(static_cast<int>(cfg.dim), budget, derive_seed(cfg.seed, budget, rep, kDesign));
  const std::size_t n = grid.size();

  std::mt19937_64 sim_rng(derive_seed(cfg.seed, budget, rep, kSimulation));
  std::vector<std::vector<double>> draws(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto native = domain.from_unit(grid.point(i));
    draws[i] = simulate(f, native, cfg.zeta, cfg.reps_per_point, sim_rng, cfg.noise_law);
  }
  const auto stats = sample_stats(draws);
  std::set<std::vector<double>> design_set;
  for (std::size_t i = 0; i < n; ++i) design_set.emplace(grid.point(i).begin(), grid.point(i).end());
  Dataset data{std::move(grid), stats.means, stats.variances, stats.reps, domain};

  NoiseModel noise = NoiseModel::noiseless(n);
  const bool noisy = cfg.zeta > 0.0 || cfg.noise_law == NoiseLaw::Unit;
  if (noisy) {
    if (cfg.reps_per_point < 2) throw InputError("estimated noise needs --reps-per-point >= 2");
    noise = NoiseModel::from_dataset(data, NoiseMode::Estimated);
    double top = 0.0;
    for (double s : noise.sigma) top = std::max(top, s);
    // Points where the response is exactly zero have zero sample variance
    // under the multiplicative noise laws; floor them relative to the rest.
    if (top == 0.0) {
      noise = NoiseModel::noiseless(n);
    } else {
      for (double& s : noise.sigma) s = std::max(s, 1e-6 * top);
    }
  }

  const auto t0 = clock::now();
  const FittedModel model = fit(tm, data, noise);
  const auto t1 = clock::now();

  std::mt19937_64 pred_rng(derive_seed(cfg.seed, budget, rep, kPrediction));
  const std::size_t levels = cfg.lattice_levels;
  std::uniform_int_distribution<std::size_t> pick(0, levels - 1);
  std::vector<std::vector<double>> xs;
  std::vector<double> truths;
  xs.reserve(cfg.pred_count);
  truths.reserve(cfg.pred_count);
  std::vector<double> u(cfg.dim);
  std::size_t attempts = 0;
  while (xs.size() < cfg.pred_count) {
    if (++attempts > 1000 * cfg.pred_count + 1000)
      throw InputError("prediction lattice is covered by the design; raise --lattice-levels");
    for (auto& v : u) v = static_cast<double>(pick(pred_rng) + 1) / static_cast<double>(levels + 1);
    if (design_set.count(u)) continue;
    auto native = domain.from_unit(u);
    truths.push_back(f(native));
    xs.push_back(std::move(native));
  }

  const auto t2 = clock::now();
  const auto preds = model.predict_batch(xs, 1);
  const auto t3 = clock::now();
  std::vector<double> means(preds.size());
  for (std::size_t k = 0; k < preds.size(); ++k) means[k] = preds[k].mean;
  row.rmse = rmse(means, truths);
  if (cfg.record_timing) {
    row.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
    row.predict_seconds = std::chrono::duration<double>(t3 - t2).count();
  }
  return row;
}

}  // namespace

TestFunction::TestFunction(TestFunctionKind kind, std::size_t dim, std::optional<double> griewank_constant)
    : kind_(kind), dim_(dim), griewank_constant_(griewank_constant) {
  if (dim < 1) throw InputError("test function dimension must be >= 1");
  if (griewank_constant && !(*griewank_constant > 0.0)) throw InputError("Griewank denominator must be positive");
}

DomainMap TestFunction::domain() const {
  return kind_ == TestFunctionKind::Schwefel222 ? DomainMap::cube(dim_, -1.0, 1.0) : DomainMap::cube(dim_, -4.0, 4.0);
}

std::string TestFunction::name() const { return kind_ == TestFunctionKind::Schwefel222 ? "schwefel222" : "griewank"; }

double TestFunction::operator()(std::span<const double> x) const {
  if (x.size() != dim_) throw InputError("test function dimension mismatch");
  const double bound = kind_ == TestFunctionKind::Schwefel222 ? 1.0 : 4.0;
  for (double v : x) {
    if (!(std::abs(v) <= bound)) throw InputError("point outside the native box of " + name());
  }
  if (kind_ == TestFunctionKind::Schwefel222) {
    double s = 0.0, p = 1.0;
    for (double v : x) {
      s += std::abs(v);
      p *= std::abs(v);
    }
    return s + p;
  }
  double s = 0.0, p = 1.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    s += x[j] * x[j] / 4000.0;
    const double den = griewank_constant_ ? *griewank_constant_ : std::sqrt(static_cast<double>(j + 1));
    p *= std::cos(x[j] / den);
  }
  return s - p + 1.0;
}

TestFunctionKind parse_test_function(const std::string& name) {
  if (name == "schwefel222") return TestFunctionKind::Schwefel222;
  if (name == "griewank") return TestFunctionKind::Griewank;
  throw InputError("unknown test function '" + name + "' (expected schwefel222 or griewank)");
}

NoiseLaw parse_noise_law(const std::string& name) {
  if (name == "zeta_y2") return NoiseLaw::ZetaSquare;
  if (name == "zeta_abs_y") return NoiseLaw::ZetaAbs;
  if (name == "unit") return NoiseLaw::Unit;
  throw InputError("unknown noise law '" + name + "' (expected zeta_y2, zeta_abs_y or unit)");
}

std::vector<double> simulate(double y, double zeta, std::size_t m, std::mt19937_64& rng, NoiseLaw law) {
  if (m < 1) throw InputError("simulate needs m >= 1");
  if (!(zeta >= 0.0)) throw InputError("noise scale must be nonnegative");
  double var = 0.0;
  switch (law) {
    case NoiseLaw::ZetaSquare:
      var = zeta * y * y;
      break;
    case NoiseLaw::ZetaAbs:
      var = zeta * std::abs(y);
      break;
    case NoiseLaw::Unit:
      var = 1.0;
      break;
  }
  std::vector<double> out(m, y);
  if (var == 0.0) return out;
  std::normal_distribution<double> noise(0.0, std::sqrt(var));
  for (auto& v : out) v += noise(rng);
  return out;
}

std::vector<double> simulate(const TestFunction& f, std::span<const double> x, double zeta, std::size_t m,
                             std::mt19937_64& rng, NoiseLaw law) {
  return simulate(f(x), zeta, m, rng, law);
}

double rmse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) throw InputError("rmse: length mismatch");
  if (predictions.empty()) throw InputError("rmse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) s += (predictions[i] - truths[i]) * (predictions[i] - truths[i]);
  return std::sqrt(s / static_cast<double>(truths.size()));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t budget, std::uint64_t rep, std::uint64_t role) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ budget);
  h = splitmix64(h ^ rep);
  return splitmix64(h ^ role);
}

std::pair<double, double> mean_and_sd(std::span<const double> v) {
  if (v.empty()) return {kNaN, kNaN};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() == 1) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::vector<AggregateRow> ExperimentReport::aggregates() const {
  std::vector<AggregateRow> out;
  std::vector<std::size_t> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.budget) == order.end()) order.push_back(r.budget);
  }
  for (std::size_t b : order) {
    std::vector<double> rm, ft, pt;
    for (const auto& r : rows) {
      if (r.budget != b || !r.error.empty()) continue;
      rm.push_back(r.rmse);
      ft.push_back(r.fit_seconds);
      pt.push_back(r.predict_seconds);
    }
    AggregateRow a;
    a.budget = b;
    std::tie(a.rmse_mean, a.rmse_sd) = mean_and_sd(rm);
    a.fit_seconds_mean = mean_and_sd(ft).first;
    a.predict_seconds_mean = mean_and_sd(pt).first;
    out.push_back(a);
  }
  return out;
}

bool ExperimentReport::has_errors() const {
  return std::any_of(rows.begin(), rows.end(), [](const ExperimentRow& r) { return !r.error.empty(); });
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.budgets.empty()) throw InputError("no budgets given");
  if (!std::is_sorted(cfg.budgets.begin(), cfg.budgets.end())) throw InputError("budgets must be ascending");
  if (cfg.macro_reps < 1) throw InputError("macro-replications must be >= 1");
  if (cfg.pred_count < 1) throw InputError("prediction count must be >= 1");
  if (cfg.reps_per_point < 1) throw InputError("replications per point must be >= 1");
  if (cfg.lattice_levels < 1) throw InputError("lattice levels must be >= 1");
  if (!(cfg.zeta >= 0.0)) throw InputError("zeta must be nonnegative");
  parse_kernel_spec(cfg.kernel, cfg.dim);

  ExperimentReport report;
  report.rows.resize(cfg.budgets.size() * cfg.macro_reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < report.rows.size(); t = next++) {
      const std::size_t budget = cfg.budgets[t / cfg.macro_reps];
      const std::size_t rep = t % cfg.macro_reps;
      try {
        report.rows[t] = run_one(cfg, budget, rep);
      } catch (const std::exception& e) {
        ExperimentRow row;
        row.budget = budget;
        row.rep = rep;
        row.rmse = kNaN;
        row.fit_seconds = kNaN;
        row.predict_seconds = kNaN;
        row.error = e.what();
        report.rows[t] = std::move(row);
      }
    }
  };
  const unsigned jobs = std::max(1u, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return report;
}

std::string format_report(const ExperimentReport& report) {
  std::string s = "budget,rep,rmse,fit_seconds,predict_seconds\n";
  for (const auto& r : report.rows) {
    s += std::to_string(r.budget) + ',' + std::to_string(r.rep) + ',' + fmt(r.rmse) + ',' + fmt(r.fit_seconds) + ',' +
         fmt(r.predict_seconds) + '\n';
  }
  if (report.rows.empty()) return s;
  s += "# aggregate\n";
  s += "budget,rmse_mean,rmse_sd,fit_seconds_mean,predict_seconds_mean\n";
  for (const auto& a : report.aggregates()) {
    s += std::to_string(a.budget) + ',' + fmt(a.rmse_mean) + ',' + fmt(a.rmse_sd) + ',' + fmt(a.fit_seconds_mean) +
         ',' + fmt(a.predict_seconds_mean) + '\n';
  }
  return s;
}

void emit_report(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << format_report(report);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace tmsk

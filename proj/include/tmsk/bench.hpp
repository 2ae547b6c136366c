#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tmsk/gm_kernels.hpp"

namespace tmsk {

enum class TestFunctionKind { Schwefel222, Griewank };

class TestFunction {
 public:
  // Griewank's cosine argument is x_j / sqrt(j) by default; a positive
  // constant replaces sqrt(j) when given.
  TestFunction(TestFunctionKind kind, std::size_t dim, std::optional<double> griewank_constant = std::nullopt);

  TestFunctionKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  // (-1, 1)^d for Schwefel 2.22, (-4, 4)^d for Griewank.
  DomainMap domain() const;
  std::string name() const;

  // x in native coordinates; outside the closed box -> InputError.
  double operator()(std::span<const double> x) const;

 private:
  TestFunctionKind kind_;
  std::size_t dim_;
  std::optional<double> griewank_constant_;
};

TestFunctionKind parse_test_function(const std::string& name);

enum class NoiseLaw { ZetaSquare, ZetaAbs, Unit };
NoiseLaw parse_noise_law(const std::string& name);

/// m draws of N(y, var) with var = zeta y^2, zeta |y| or 1 by law.
std::vector<double> simulate(double y, double zeta, std::size_t m, std::mt19937_64& rng,
                             NoiseLaw law = NoiseLaw::ZetaSquare);
std::vector<double> simulate(const TestFunction& f, std::span<const double> x, double zeta, std::size_t m,
                             std::mt19937_64& rng, NoiseLaw law = NoiseLaw::ZetaSquare);

double rmse(std::span<const double> predictions, std::span<const double> truths);

// Independent substream seed for (seed, budget, rep, role).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t budget, std::uint64_t rep, std::uint64_t role);

struct ExperimentConfig {
  TestFunctionKind function = TestFunctionKind::Griewank;
  std::size_t dim = 2;
  std::vector<std::size_t> budgets;  // design-point counts, ascending
  double zeta = 0.1;
  std::size_t reps_per_point = 10;
  std::size_t macro_reps = 1;
  std::size_t pred_count = 1000;
  std::uint64_t seed = 0;
  std::string kernel = "laplace:1";
  std::size_t lattice_levels = 4;
  unsigned jobs = 1;
  NoiseLaw noise_law = NoiseLaw::ZetaSquare;
  std::optional<double> griewank_constant;
  bool record_timing = true;
};

struct ExperimentRow {
  std::size_t budget = 0;
  std::size_t rep = 0;
  double rmse = 0.0;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
  std::string error;  // empty on success
};

struct AggregateRow {
  std::size_t budget = 0;
  double rmse_mean = 0.0;
  double rmse_sd = 0.0;
  double fit_seconds_mean = 0.0;
  double predict_seconds_mean = 0.0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;  // ordered by (budget, rep)

  std::vector<AggregateRow> aggregates() const;
  bool has_errors() const;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Mean and sample standard deviation (divisor R - 1; 0 when R = 1).
std::pair<double, double> mean_and_sd(std::span<const double> v);

std::string format_report(const ExperimentReport& report);
void emit_report(const ExperimentReport& report, const std::string& path);

}  // namespace tmsk

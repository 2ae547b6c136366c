#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "tmsk/fast_inverse.hpp"
#include "tmsk/gm_kernels.hpp"
#include "tmsk/numeric_policy.hpp"
#include "tmsk/sparse_designs.hpp"
#include "tmsk/sparse_matrix.hpp"

namespace tmsk {

enum class NoiseMode { Noiseless, Known, Estimated };

struct SampleStats {
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<std::size_t> reps;
  // True when some point has a single replication (variance reported as 0).
  bool single_replication = false;
};

/// Per-point mean and unbiased sample variance (divisor m - 1).
SampleStats sample_stats(const std::vector<std::vector<double>>& replications);

/// Observations on a truncated sparse grid. Variances are per-replication
/// (sigma^2(x_i)); the noise covariance divides them by reps.
struct Dataset {
  TruncatedSparseGrid grid;
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<std::size_t> reps;
  DomainMap domain;

  std::size_t size() const { return means.size(); }
};

// Builds a Dataset with unit domain and zero variances, one replication each.
Dataset make_dataset(TruncatedSparseGrid grid, std::vector<double> means);

struct NoiseModel {
  NoiseMode mode = NoiseMode::Noiseless;
  std::vector<double> sigma;  // Sigma_ii = sigma^2(x_i) / m_i

  static NoiseModel noiseless(std::size_t n);
  static NoiseModel from_dataset(const Dataset& data, NoiseMode mode);
  static NoiseModel diagonal(std::vector<double> sigma, NoiseMode mode = NoiseMode::Known);
};

struct Prediction {
  double mean = 0.0;
  double mse = 0.0;
  // Point lay outside the open unit cube and was moved inside.
  bool clamped = false;
};

class FittedModel {
 public:
  const TMKernel& kernel() const { return tm_; }
  const Dataset& data() const { return data_; }
  const NoiseModel& noise() const { return noise_; }
  const SparseSymMatrix& kinv() const { return kinv_->matrix(); }
  const TsgInverse& tsg_inverse() const { return *kinv_; }
  // Noiseless: K^{-1} Ybar. Noisy: L^{-1} Sigma^{-1} Ybar.
  const std::vector<double>& weights() const { return weights_; }
  // Present only for noisy models.
  const LowerTriangularFactor* factor() const { return factor_ ? factor_.get() : nullptr; }

  /// x in user coordinates.
  Prediction predict(std::span<const double> x) const;
  std::vector<Prediction> predict_batch(const std::vector<std::vector<double>>& xs, unsigned parallelism = 1) const;

 private:
  friend FittedModel fit(const TMKernel&, const Dataset&, const NoiseModel&, NumericPolicy);
  FittedModel(const TMKernel& tm, Dataset data, NoiseModel noise, NumericPolicy policy)
      : tm_(tm), data_(std::move(data)), noise_(std::move(noise)), policy_(policy) {}

  double finish_mse(double mse, double kxx) const;

  TMKernel tm_;
  Dataset data_;
  NoiseModel noise_;
  NumericPolicy policy_;
  std::shared_ptr<const TsgInverse> kinv_;
  std::shared_ptr<const LowerTriangularFactor> factor_;
  std::vector<double> weights_;
  std::vector<double> sigma_inv_y_;
};

FittedModel fit(const TMKernel& tm, const Dataset& data, const NoiseModel& noise, NumericPolicy policy = {});

// Maps x from user coordinates into [2^-52, 1 - 2^-52]^d; sets clamped when moved.
std::vector<double> to_internal(const DomainMap& domain, std::span<const double> x, bool& clamped);

/// Dense Gram-matrix predictor used as the reference oracle.
std::vector<Prediction> dense_reference(const TMKernel& tm, const Dataset& data, const NoiseModel& noise,
                                        const std::vector<std::vector<double>>& xs, NumericPolicy policy = {});

struct BudgetSplit {
  std::size_t n;
  std::size_t m;
};

/// n = round(B^{1/3}) (B^{1/5} when misspecified), m = floor(B / n).
BudgetSplit allocate_budget(std::size_t budget, bool misspecified = false);

}  // namespace tmsk

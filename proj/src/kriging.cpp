#include "tmsk/kriging.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "tmsk/errors.hpp"

namespace tmsk {

namespace {

constexpr double kEdge = 0x1p-52;

void check_dataset(const TMKernel& tm, const Dataset& data) {
  const std::size_t n = data.grid.size();
  if (static_cast<int>(tm.dim()) != data.grid.dim())
    throw InputError("kernel dimension " + std::to_string(tm.dim()) + " differs from design dimension " +
                     std::to_string(data.grid.dim()));
  if (data.means.size() != n || data.variances.size() != n || data.reps.size() != n)
    throw InputError("dataset arrays must have one entry per design point (" + std::to_string(n) + ")");
  if (data.domain.dim() != static_cast<std::size_t>(data.grid.dim()))
    throw InputError("domain map dimension differs from design dimension");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(data.means[i])) throw InputError("non-finite mean at point " + std::to_string(i));
    if (!std::isfinite(data.variances[i]) || data.variances[i] < 0.0)
      throw InputError("variance must be finite and nonnegative at point " + std::to_string(i));
    if (data.reps[i] < 1) throw InputError("replication count must be >= 1 at point " + std::to_string(i));
  }
  for (std::size_t j = 0; j < tm.dim(); ++j) {
    const auto& k = tm.component(j);
    for (std::size_t i = 0; i < n; ++i) {
      if (!k.in_domain(data.grid.point(i)[j]))
        throw InputError("design coordinate outside the domain of kernel component " + k.to_string());
    }
  }
}

}  // namespace

SampleStats sample_stats(const std::vector<std::vector<double>>& replications) {
  SampleStats s;
  s.means.reserve(replications.size());
  for (std::size_t i = 0; i < replications.size(); ++i) {
    const auto& r = replications[i];
    if (r.empty()) throw InputError("no replications at point " + std::to_string(i));
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    s.means.push_back(mean);
    s.reps.push_back(r.size());
    if (r.size() == 1) {
      s.variances.push_back(0.0);
      s.single_replication = true;
    } else {
      s.variances.push_back(ss / static_cast<double>(r.size() - 1));
    }
  }
  return s;
}

Dataset make_dataset(TruncatedSparseGrid grid, std::vector<double> means) {
  const std::size_t n = grid.size();
  const auto d = static_cast<std::size_t>(grid.dim());
  return Dataset{std::move(grid), std::move(means), std::vector<double>(n, 0.0), std::vector<std::size_t>(n, 1),
                 DomainMap::unit(d)};
}

NoiseModel NoiseModel::noiseless(std::size_t n) { return {NoiseMode::Noiseless, std::vector<double>(n, 0.0)}; }

NoiseModel NoiseModel::from_dataset(const Dataset& data, NoiseMode mode) {
  if (mode == NoiseMode::Noiseless) return noiseless(data.size());
  NoiseModel nm{mode, std::vector<double>(data.size())};
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (mode == NoiseMode::Estimated && data.reps[i] < 2)
      throw InputError("estimated noise needs at least 2 replications; point " + std::to_string(i) + " has " +
                       std::to_string(data.reps[i]));
    nm.sigma[i] = data.variances[i] / static_cast<double>(data.reps[i]);
  }
  return nm;
}

NoiseModel NoiseModel::diagonal(std::vector<double> sigma, NoiseMode mode) { return {mode, std::move(sigma)}; }

std::vector<double> to_internal(const DomainMap& domain, std::span<const double> x, bool& clamped) {
  auto u = domain.to_unit(x);
  clamped = false;
  for (double& v : u) {
    if (!std::isfinite(v)) throw InputError("non-finite prediction coordinate");
    if (v < kEdge) {
      v = kEdge;
      clamped = true;
    } else if (v > 1.0 - kEdge) {
      v = 1.0 - kEdge;
      clamped = true;
    }
  }
  return u;
}

FittedModel fit(const TMKernel& tm, const Dataset& data, const NoiseModel& noise, NumericPolicy policy) {
  check_dataset(tm, data);
  const std::size_t n = data.size();
  if (noise.sigma.size() != n) throw InputError("noise model size differs from the number of design points");

  NoiseModel nm = noise;
  const bool all_zero = std::all_of(nm.sigma.begin(), nm.sigma.end(), [](double s) { return s == 0.0; });
  if (all_zero) nm.mode = NoiseMode::Noiseless;
  if (nm.mode == NoiseMode::Noiseless && !all_zero)
    throw InputError("noiseless mode with nonzero noise variances");
  if (nm.mode != NoiseMode::Noiseless) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(nm.sigma[i] > 0.0) || !std::isfinite(nm.sigma[i]))
        throw InputError("noise variance must be positive in noisy mode; point " + std::to_string(i) + " has " +
                         std::to_string(nm.sigma[i]));
      if (nm.mode == NoiseMode::Estimated && data.reps[i] < 2)
        throw InputError("estimated noise needs at least 2 replications at point " + std::to_string(i));
    }
  }

  FittedModel model(tm, data, nm, policy);
  model.kinv_ = std::make_shared<const TsgInverse>(tm, data.grid, policy);
  const auto& kinv = model.kinv_->matrix();
  if (nm.mode == NoiseMode::Noiseless) {
    model.weights_ = kinv.multiply(data.means);
    return model;
  }

  std::vector<double> sinv(n);
  model.sigma_inv_y_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sinv[i] = 1.0 / nm.sigma[i];
    model.sigma_inv_y_[i] = data.means[i] * sinv[i];
  }
  try {
    model.factor_ = std::make_shared<const LowerTriangularFactor>(sparse_cholesky(kinv.plus_diagonal(sinv)));
  } catch (const NotPositiveDefiniteError& e) {
    throw NotPositiveDefiniteError(std::string("Cholesky of K^{-1} + Sigma^{-1} failed (n=") + std::to_string(n) +
                                   ", nnz=" + std::to_string(kinv.nnz()) + "): " + e.what());
  }
  // Woodbury: (K + Sigma)^{-1} = Sigma^{-1} - Sigma^{-1} M^{-1} Sigma^{-1} with
  // M = K^{-1} + Sigma^{-1} = L L^T, so both vectors take the lower solve.
  model.weights_ = solve_lower(*model.factor_, model.sigma_inv_y_);
  return model;
}

double FittedModel::finish_mse(double mse, double kxx) const {
  if (mse >= 0.0) return mse;
  if (mse >= -policy_.mse_negative_tolerance * std::max(1.0, kxx)) return 0.0;
  throw NumericalError("negative mean squared error " + std::to_string(mse) + " (k(x,x)=" + std::to_string(kxx) + ")");
}

Prediction FittedModel::predict(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(data_.grid.dim())) throw InputError("prediction point dimension mismatch");
  Prediction out;
  const auto u = to_internal(data_.domain, x, out.clamped);
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!tm_.component(j).in_domain(u[j]))
      throw InputError("prediction coordinate outside the domain of kernel component " + tm_.component(j).to_string());
  }
  const double kxx = tm_.eval_unchecked(u.data(), u.data());
  const std::size_t n = data_.size();

  if (noise_.mode == NoiseMode::Noiseless) {
    const SparseVector v = kinv_->solve_kernel_vector(u);
    double mean = 0.0, quad = 0.0;
    for (std::size_t k = 0; k < v.nnz(); ++k) {
      mean += v.val[k] * data_.means[v.idx[k]];
      quad += v.val[k] * tm_.eval_unchecked(data_.grid.point(v.idx[k]).data(), u.data());
    }
    out.mean = mean;
    out.mse = finish_mse(kxx - quad, kxx);
    return out;
  }

  std::vector<double> s(n);
  double ksk = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = tm_.eval_unchecked(data_.grid.point(i).data(), u.data());
    s[i] = k / noise_.sigma[i];
    ksk += k * s[i];
    mean += k * sigma_inv_y_[i];
  }
  const auto b1 = solve_lower(*factor_, s);
  double b1b2 = 0.0, b1b1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b1b2 += b1[i] * weights_[i];
    b1b1 += b1[i] * b1[i];
  }
  out.mean = mean - b1b2;
  out.mse = finish_mse(kxx - ksk + b1b1, kxx);
  return out;
}

std::vector<Prediction> FittedModel::predict_batch(const std::vector<std::vector<double>>& xs,
                                                   unsigned parallelism) const {
  std::vector<Prediction> out(xs.size());
  const std::size_t threads = std::min<std::size_t>(std::max(1u, parallelism), std::max<std::size_t>(xs.size(), 1));
  if (threads <= 1) {
    for (std::size_t k = 0; k < xs.size(); ++k) out[k] = predict(xs[k]);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t k = t; k < xs.size(); k += threads) out[k] = predict(xs[k]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<Prediction> dense_reference(const TMKernel& tm, const Dataset& data, const NoiseModel& noise,
                                        const std::vector<std::vector<double>>& xs, NumericPolicy policy) {
  check_dataset(tm, data);
  const std::size_t n = data.size();
  if (n > policy.dense_cap)
    throw ResourceError("dense reference limited to n <= " + std::to_string(policy.dense_cap) + ", got " +
                        std::to_string(n));
  if (noise.sigma.size() != n) throw InputError("noise model size differs from the number of design points");
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd K(ni, ni);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = tm.eval_unchecked(data.grid.point(i).data(), data.grid.point(j).data());
      K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
    K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += noise.sigma[i];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("dense reference: K + Sigma is not positive definite");
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.means.data(), ni);
  const Eigen::VectorXd z = llt.solve(y);

  std::vector<Prediction> out(xs.size());
  Eigen::VectorXd k(ni);
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const auto u = to_internal(data.domain, xs[q], out[q].clamped);
    for (std::size_t i = 0; i < n; ++i) k(static_cast<Eigen::Index>(i)) = tm.eval_unchecked(data.grid.point(i).data(), u.data());
    const Eigen::VectorXd v = llt.solve(k);
    out[q].mean = k.dot(z);
    out[q].mse = tm.eval_unchecked(u.data(), u.data()) - k.dot(v);
  }
  return out;
}

BudgetSplit allocate_budget(std::size_t budget, bool misspecified) {
  if (budget < 2) throw InputError("budget must be >= 2");
  const double b = static_cast<double>(budget);
  auto n = static_cast<std::size_t>(std::llround(misspecified ? std::pow(b, 0.2) : std::cbrt(b)));
  n = std::clamp<std::size_t>(n, 1, budget);
  return {n, budget / n};
}

}  // namespace tmsk

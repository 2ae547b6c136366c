#include "tmsk/gm_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tmsk/errors.hpp"

namespace tmsk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_number(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw InputError("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InputError("bad number '" + s + "' in kernel spec '" + spec + "'");
  }
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

GaussMarkov1D GaussMarkov1D::brownian_motion() { return {KernelFamily::BrownianMotion, 0.0, 0.0}; }

GaussMarkov1D GaussMarkov1D::brownian_bridge(double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InputError("Brownian bridge horizon must be positive, got " + fmt_double(horizon));
  return {KernelFamily::BrownianBridge, horizon, 0.0};
}

GaussMarkov1D GaussMarkov1D::laplace(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw InputError("Laplace theta must be positive, got " + fmt_double(theta));
  return {KernelFamily::Laplace, theta, 0.0};
}

GaussMarkov1D GaussMarkov1D::affine_brownian(double theta0, double theta1) {
  if (!(theta0 >= 0.0) || !std::isfinite(theta0))
    throw InputError("affine Brownian theta0 must be nonnegative, got " + fmt_double(theta0));
  if (!(theta1 > 0.0) || !std::isfinite(theta1))
    throw InputError("affine Brownian theta1 must be positive, got " + fmt_double(theta1));
  return {KernelFamily::AffineBrownian, theta0, theta1};
}

double GaussMarkov1D::p(double x) const {
  switch (family_) {
    case KernelFamily::BrownianMotion:
    case KernelFamily::BrownianBridge:
      return x;
    case KernelFamily::Laplace:
      return std::exp(a_ * x);
    case KernelFamily::AffineBrownian:
      return a_ + b_ * x;
  }
  return 0.0;
}

double GaussMarkov1D::q(double x) const {
  switch (family_) {
    case KernelFamily::BrownianMotion:
    case KernelFamily::AffineBrownian:
      return 1.0;
    case KernelFamily::BrownianBridge:
      return 1.0 - x / a_;
    case KernelFamily::Laplace:
      return std::exp(-a_ * x);
  }
  return 0.0;
}

double GaussMarkov1D::p(Node n) const {
  switch (n.kind) {
    case Node::Kind::Left:
      return 0.0;
    case Node::Kind::Right:
      return 1.0;
    case Node::Kind::Finite:
      break;
  }
  return p(n.x);
}

double GaussMarkov1D::q(Node n) const {
  switch (n.kind) {
    case Node::Kind::Left:
      return 1.0;
    case Node::Kind::Right:
      return 0.0;
    case Node::Kind::Finite:
      break;
  }
  return q(n.x);
}

double GaussMarkov1D::eval_unchecked(double x, double y) const {
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  if (family_ == KernelFamily::Laplace) return std::exp(-a_ * (hi - lo));
  return p(lo) * q(hi);
}

double GaussMarkov1D::operator()(double x, double y) const {
  if (!in_domain(x) || !in_domain(y))
    throw InputError("kernel argument outside domain of " + to_string() + ": (" + fmt_double(x) +
                     ", " + fmt_double(y) + ")");
  return eval_unchecked(x, y);
}

double GaussMarkov1D::cross(double a, double b) const {
  switch (family_) {
    case KernelFamily::BrownianMotion:
    case KernelFamily::BrownianBridge:
      return b - a;
    case KernelFamily::Laplace:
      return 2.0 * std::sinh(a_ * (b - a));
    case KernelFamily::AffineBrownian:
      return b_ * (b - a);
  }
  return 0.0;
}

double GaussMarkov1D::cross(Node a, Node b) const {
  using K = Node::Kind;
  if (a.kind == K::Finite && b.kind == K::Finite) return cross(a.x, b.x);
  if (a.kind == K::Left && b.kind == K::Finite) return p(b.x);
  if (a.kind == K::Finite && b.kind == K::Right) return q(a.x);
  if (a.kind == K::Left && b.kind == K::Right) return 1.0;
  return p(b) * q(a) - p(a) * q(b);
}

double GaussMarkov1D::lower_bound() const {
  switch (family_) {
    case KernelFamily::BrownianMotion:
    case KernelFamily::BrownianBridge:
      return 0.0;
    case KernelFamily::Laplace:
      return -kInf;
    case KernelFamily::AffineBrownian:
      return -a_ / b_;
  }
  return 0.0;
}

double GaussMarkov1D::upper_bound() const {
  return family_ == KernelFamily::BrownianBridge ? a_ : kInf;
}

std::string GaussMarkov1D::to_string() const {
  switch (family_) {
    case KernelFamily::BrownianMotion:
      return "bm";
    case KernelFamily::BrownianBridge:
      return "bb:" + fmt_double(a_);
    case KernelFamily::Laplace:
      return "laplace:" + fmt_double(a_);
    case KernelFamily::AffineBrownian:
      return "affinebm:" + fmt_double(a_) + "," + fmt_double(b_);
  }
  return "?";
}

TMKernel::TMKernel(std::vector<GaussMarkov1D> components) : components_(std::move(components)) {
  if (components_.empty()) throw InputError("tensor Markov kernel needs at least one dimension");
}

TMKernel TMKernel::broadcast(const GaussMarkov1D& k, std::size_t dim) {
  return TMKernel(std::vector<GaussMarkov1D>(dim, k));
}

double TMKernel::operator()(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != dim() || y.size() != dim())
    throw InputError("kernel dimension mismatch: kernel has d=" + std::to_string(dim()) +
                     ", got points of size " + std::to_string(x.size()) + " and " +
                     std::to_string(y.size()));
  double v = 1.0;
  for (std::size_t j = 0; j < dim(); ++j) v *= components_[j](x[j], y[j]);
  return v;
}

double TMKernel::eval_unchecked(const double* x, const double* y) const {
  double v = 1.0;
  for (std::size_t j = 0; j < components_.size(); ++j) v *= components_[j].eval_unchecked(x[j], y[j]);
  return v;
}

double TMKernel::diagonal(std::span<const double> x) const { return (*this)(x, x); }

std::string TMKernel::to_string() const {
  std::string s;
  for (std::size_t j = 0; j < components_.size(); ++j) {
    if (j) s += ';';
    s += components_[j].to_string();
  }
  return s;
}

DomainMap::DomainMap(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) throw InputError("domain map: lo and hi sizes differ");
  for (std::size_t j = 0; j < lo_.size(); ++j) {
    if (!(lo_[j] < hi_[j]) || !std::isfinite(lo_[j]) || !std::isfinite(hi_[j]))
      throw InputError("domain map: need lo < hi in dimension " + std::to_string(j + 1));
  }
}

DomainMap DomainMap::unit(std::size_t dim) { return cube(dim, 0.0, 1.0); }

DomainMap DomainMap::cube(std::size_t dim, double lo, double hi) {
  return DomainMap(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

std::vector<double> DomainMap::to_unit(std::span<const double> x) const {
  if (x.size() != dim()) throw InputError("domain map: dimension mismatch");
  std::vector<double> u(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) u[j] = (x[j] - lo_[j]) / (hi_[j] - lo_[j]);
  return u;
}

std::vector<double> DomainMap::from_unit(std::span<const double> u) const {
  if (u.size() != dim()) throw InputError("domain map: dimension mismatch");
  std::vector<double> x(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) x[j] = lo_[j] + u[j] * (hi_[j] - lo_[j]);
  return x;
}

MarkovReport validate_markov(const std::function<double(double)>& p,
                             const std::function<double(double)>& q, std::size_t probe_count) {
  if (probe_count < 2) throw InputError("validate_markov needs at least 2 probes");
  MarkovReport report;
  double prev_ratio = 0.0;
  double prev_x = 0.0;
  for (std::size_t k = 0; k < probe_count; ++k) {
    const double x = static_cast<double>(k + 1) / static_cast<double>(probe_count + 1);
    const double pv = p(x);
    const double qv = q(x);
    if (!(pv > 0.0) || !(qv > 0.0) || !std::isfinite(pv) || !std::isfinite(qv)) {
      report.pass = false;
      report.first_violation = std::make_pair(x, x);
      report.message = "p or q not positive at x=" + fmt_double(x);
      return report;
    }
    const double ratio = pv / qv;
    if (k > 0 && !(ratio > prev_ratio)) {
      report.pass = false;
      report.first_violation = std::make_pair(prev_x, x);
      report.message = "p/q not strictly increasing between x=" + fmt_double(prev_x) +
                       " and x=" + fmt_double(x);
      return report;
    }
    prev_ratio = ratio;
    prev_x = x;
  }
  report.message = "ok";
  return report;
}

MarkovReport validate_markov(const GaussMarkov1D& kern, std::size_t probe_count) {
  return validate_markov([&](double x) { return kern.p(x); }, [&](double x) { return kern.q(x); },
                         probe_count);
}

GaussMarkov1D parse_component_spec(const std::string& raw) {
  const std::string spec = trim(raw);
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? std::string{} : spec.substr(colon + 1);
  std::vector<double> vals;
  if (!args.empty()) {
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(parse_number(trim(tok), spec));
  }
  auto want = [&](std::size_t n) {
    if (vals.size() != n)
      throw InputError("kernel spec '" + spec + "' expects " + std::to_string(n) + " parameter(s)");
  };
  if (name == "bm") {
    want(0);
    return GaussMarkov1D::brownian_motion();
  }
  if (name == "bb") {
    want(1);
    return GaussMarkov1D::brownian_bridge(vals[0]);
  }
  if (name == "laplace") {
    want(1);
    return GaussMarkov1D::laplace(vals[0]);
  }
  if (name == "affinebm") {
    want(2);
    return GaussMarkov1D::affine_brownian(vals[0], vals[1]);
  }
  throw InputError("unknown kernel '" + name + "' (expected laplace:θ, bm, bb:T or affinebm:θ0,θ1)");
}

TMKernel parse_kernel_spec(const std::string& spec, std::size_t dim) {
  std::vector<GaussMarkov1D> comps;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ';')) {
    if (!trim(tok).empty()) comps.push_back(parse_component_spec(tok));
  }
  if (comps.size() == 1) return TMKernel::broadcast(comps.front(), dim);
  if (comps.size() != dim)
    throw InputError("kernel spec has " + std::to_string(comps.size()) + " components for d=" +
                     std::to_string(dim));
  return TMKernel(std::move(comps));
}

}  // namespace tmsk

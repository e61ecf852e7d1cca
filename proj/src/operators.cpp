#include "mafl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mafl {

ThetaProfile ThetaProfile::power(double a) {
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "power profile needs a > 0");
  return {ThetaKind::Power, a};
}

namespace {
void require_positive(double y) {
  if (!(y > 0.0))
    throw Error(ErrorKind::ConeViolation,
                "profile evaluated at non-positive ratio " + std::to_string(y) +
                    " (metric positivity lost)");
}
}  // namespace

double ThetaProfile::value(double y) const {
  require_positive(y);
  switch (kind) {
    case ThetaKind::Log: return std::log(y);
    case ThetaKind::NegInverse: return -1.0 / y;
    case ThetaKind::Linear: return y;
    case ThetaKind::CubeRoot: return std::cbrt(y);
    case ThetaKind::Power: return std::pow(y, exponent);
  }
  return 0.0;
}

double ThetaProfile::prime(double y) const {
  require_positive(y);
  switch (kind) {
    case ThetaKind::Log: return 1.0 / y;
    case ThetaKind::NegInverse: return 1.0 / (y * y);
    case ThetaKind::Linear: return 1.0;
    case ThetaKind::CubeRoot: return 1.0 / (3.0 * std::cbrt(y * y));
    case ThetaKind::Power: return exponent * std::pow(y, exponent - 1.0);
  }
  return 0.0;
}

double ThetaProfile::log_slope(double y) const {
  require_positive(y);
  switch (kind) {
    case ThetaKind::Log: return 1.0;
    case ThetaKind::NegInverse: return 1.0 / y;
    case ThetaKind::Linear: return y;
    case ThetaKind::CubeRoot: return std::cbrt(y) / 3.0;
    case ThetaKind::Power: return exponent * std::pow(y, exponent);
  }
  return 0.0;
}

std::string ThetaProfile::name() const {
  switch (kind) {
    case ThetaKind::Log: return "log";
    case ThetaKind::NegInverse: return "neg_inverse";
    case ThetaKind::Linear: return "linear";
    case ThetaKind::CubeRoot: return "cube_root";
    case ThetaKind::Power: return "power";
  }
  return "?";
}

double theta_eval(const ThetaProfile& profile, double y) { return profile.value(y); }
double theta_prime(const ThetaProfile& profile, double y) { return profile.prime(y); }

double sigma(int j, std::span<const double> lambda) {
  if (j < 0 || j > static_cast<int>(lambda.size())) return 0.0;
  // e[i] accumulates sigma_i of the prefix processed so far.
  std::vector<double> e(lambda.size() + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t m = 0; m < lambda.size(); ++m)
    for (std::size_t i = m + 1; i >= 1; --i) e[i] += lambda[m] * e[i - 1];
  return e[j];
}

bool cone_check(std::span<const double> lambda, int k) {
  for (int j = 1; j <= k; ++j)
    if (!(sigma(j, lambda) > 0.0)) return false;
  return true;
}

OperatorSpec OperatorSpec::monge_ampere(int n) {
  return OperatorSpec{OperatorKind::MongeAmpere, n, n, 1.0};
}

OperatorSpec OperatorSpec::sigma_k(int n, int k, std::uint64_t seed) {
  if (k < 1 || k > n) throw Error(ErrorKind::InvalidArgument, "sigma_k needs 1 <= k <= n");
  OperatorSpec op{OperatorKind::SigmaK, n, k, 1.0};
  op.gamma = 0.5 * sampled_structural_minimum(op, 1000, seed);
  return op;
}

std::string OperatorSpec::name() const {
  return kind == OperatorKind::MongeAmpere ? "monge_ampere" : "sigma_" + std::to_string(k);
}

namespace {
void require_cone(const OperatorSpec& op, std::span<const double> lambda) {
  if (static_cast<int>(lambda.size()) != op.n)
    throw Error(ErrorKind::InvalidArgument, "eigenvalue vector length differs from n");
  if (!cone_check(lambda, op.cone_index()))
    throw Error(ErrorKind::ConeViolation, "eigenvalues outside the operator cone");
}
}  // namespace

double F_eval(const OperatorSpec& op, std::span<const double> lambda) {
  require_cone(op, lambda);
  return sigma(op.k, lambda);
}

std::vector<double> F_grad(const OperatorSpec& op, std::span<const double> lambda) {
  require_cone(op, lambda);
  std::vector<double> grad(lambda.size());
  std::vector<double> rest;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    rest.assign(lambda.begin(), lambda.end());
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(j));
    grad[j] = sigma(op.k - 1, rest);
  }
  return grad;
}

double structural_ratio(const OperatorSpec& op, std::span<const double> lambda) {
  const double F = F_eval(op, lambda);
  const auto grad = F_grad(op, lambda);
  double prod = 1.0;
  for (double g : grad) prod *= g;
  const double r = op.degree();
  return prod / std::pow(F, op.n * (1.0 - 1.0 / r));
}

std::vector<double> random_cone_point(int n, int k, std::uint64_t& state) {
  std::mt19937_64 rng(state);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> lambda(n);
  for (;;) {
    for (auto& v : lambda) v = u(rng);
    if (cone_check(lambda, k)) break;
  }
  state = rng();
  return lambda;
}

double sampled_structural_minimum(const OperatorSpec& op, int samples, std::uint64_t seed) {
  double lowest = std::numeric_limits<double>::infinity();
  std::uint64_t state = seed;
  for (int i = 0; i < samples; ++i) {
    const auto lambda = random_cone_point(op.n, op.cone_index(), state);
    lowest = std::min(lowest, structural_ratio(op, lambda));
  }
  return lowest;
}

double max_eigenvalue(const HermitianMatrix& m, int n) { return hermitian_eigenvalues(m, n)[n - 1]; }

OperatorPoint evaluate_point(const OperatorSpec& op, const HermitianMatrix& m, std::span<const double> lambda) {
  const int n = op.n;
  OperatorPoint out;
  if (op.kind == OperatorKind::SigmaK && op.k == 1 && n == 2) {
    // d(tr h)/dh = I
    out.F = lambda[0] + lambda[1];
    if (!(out.F > 0.0)) throw Error(ErrorKind::ConeViolation, "eigenvalues outside the operator cone");
    out.G = HermitianMatrix{1.0 / out.F, 1.0 / out.F, {0.0, 0.0}};
    out.G_max_eigen = 1.0 / out.F;
  } else if (op.k == n) {
    // d(det h)/dh / det h = h^{-1}
    if (!(lambda[0] > 0.0)) throw Error(ErrorKind::ConeViolation, "eigenvalues outside the operator cone");
    out.F = m.det(n);
    out.G = n == 1 ? HermitianMatrix{1.0 / m.a, 0.0, {0.0, 0.0}}
                   : HermitianMatrix{m.d / out.F, m.a / out.F, -m.c / out.F};
    out.G_max_eigen = 1.0 / lambda[0];
  } else {
    throw Error(ErrorKind::InvalidArgument, "unsupported operator " + op.name());
  }
  out.structural = out.G.det(n) * std::pow(out.F, static_cast<double>(n) / op.degree());
  return out;
}

LinearizationField linearization_coeffs(const OperatorSpec& op, const HermitianHessianField& h) {
  const int n = h.dim();
  if (n != op.n) throw Error(ErrorKind::InvalidArgument, "operator dimension differs from grid");
  LinearizationField out{h.grid, {}, {}, std::numeric_limits<double>::infinity(), 0.0};
  out.coeffs.resize(h.matrices.size());
  out.F_values.resize(h.matrices.size());
  for (std::size_t i = 0; i < h.matrices.size(); ++i) {
    const OperatorPoint pt = evaluate_point(op, h.matrices[i], h.lambda(i));
    out.coeffs[i] = pt.G;
    out.F_values[i] = pt.F;
    out.min_structural = std::min(out.min_structural, pt.structural);
    out.max_eigen = std::max(out.max_eigen, pt.G_max_eigen);
  }
  return out;
}

}  // namespace mafl

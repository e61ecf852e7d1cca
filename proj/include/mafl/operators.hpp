#pragma once

// Monotone profiles Theta and the Hessian operators F (Monge-Ampere, sigma_k).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mafl/torus.hpp"

namespace mafl {

enum class ThetaKind { Log, NegInverse, Linear, CubeRoot, Power };

/// Strictly increasing profile Theta : (0, inf) -> R.
struct ThetaProfile {
  ThetaKind kind = ThetaKind::Log;
  double exponent = 1.0;  // only for Power

  static ThetaProfile log() { return {ThetaKind::Log, 1.0}; }
  static ThetaProfile neg_inverse() { return {ThetaKind::NegInverse, 1.0}; }
  static ThetaProfile linear() { return {ThetaKind::Linear, 1.0}; }
  static ThetaProfile cube_root() { return {ThetaKind::CubeRoot, 1.0}; }
  static ThetaProfile power(double a);

  double value(double y) const;
  double prime(double y) const;
  /// y * Theta'(y): the factor multiplying G in the linearized flow.
  double log_slope(double y) const;
  std::string name() const;
};

double theta_eval(const ThetaProfile& profile, double y);
double theta_prime(const ThetaProfile& profile, double y);

/// Elementary symmetric polynomial sigma_j(lambda); sigma_0 = 1.
double sigma(int j, std::span<const double> lambda);

/// True iff sigma_j(lambda) > 0 for every 1 <= j <= k.
bool cone_check(std::span<const double> lambda, int k);

enum class OperatorKind { MongeAmpere, SigmaK };

struct OperatorSpec {
  OperatorKind kind = OperatorKind::MongeAmpere;
  int n = 1;
  int k = 1;  // sigma_k order; equals n for Monge-Ampere
  double gamma = 1.0;

  static OperatorSpec monge_ampere(int n);
  /// gamma is set empirically (half the sampled minimum of the structural ratio).
  static OperatorSpec sigma_k(int n, int k, std::uint64_t seed = 20240521);

  int degree() const { return kind == OperatorKind::MongeAmpere ? n : k; }
  int cone_index() const { return kind == OperatorKind::MongeAmpere ? n : k; }
  std::string name() const;
};

double F_eval(const OperatorSpec& op, std::span<const double> lambda);
std::vector<double> F_grad(const OperatorSpec& op, std::span<const double> lambda);

/// prod_j dF/dlambda_j / F^{n(1 - 1/r)}; condition (4) asks this to be >= gamma.
double structural_ratio(const OperatorSpec& op, std::span<const double> lambda);

/// Minimum of structural_ratio over random cone points.
double sampled_structural_minimum(const OperatorSpec& op, int samples, std::uint64_t seed);

/// Draw a random point of the cone Gamma_k in R^n.
std::vector<double> random_cone_point(int n, int k, std::uint64_t& state);

/// Per-point coefficients G = (1/F) dF/dh of the linearized flow.
struct LinearizationField {
  TorusGrid grid;
  std::vector<HermitianMatrix> coeffs;
  std::vector<double> F_values;
  /// min over points of det G * F^{n/r}.
  double min_structural = 0.0;
  /// max over points of the largest eigenvalue of G.
  double max_eigen = 0.0;
};

/// Per-point operator data without allocation.
struct OperatorPoint {
  double F = 0.0;
  HermitianMatrix G;
  double G_max_eigen = 0.0;
  /// det G * F^{n/r}
  double structural = 0.0;
};

/// Throws ConeViolation when lambda leaves the operator cone.
OperatorPoint evaluate_point(const OperatorSpec& op, const HermitianMatrix& h, std::span<const double> lambda);

LinearizationField linearization_coeffs(const OperatorSpec& op, const HermitianHessianField& h);

/// Largest eigenvalue of G at one point (closed form, n <= 2).
double max_eigenvalue(const HermitianMatrix& m, int n);

}  // namespace mafl

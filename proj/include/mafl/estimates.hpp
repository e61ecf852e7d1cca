#pragma once

// Executable forms of the core inequalities: the level-set and weighted test
// functions, the exponential bound, the iteration inequality, Young's
// inequality and the chain for generalized operators.

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "mafl/aux_flow.hpp"
#include "mafl/flow.hpp"
#include "mafl/functionals.hpp"

namespace mafl {

/// One evaluated inequality lhs <= rhs (margin = lhs - rhs, pass iff margin <= tolerance).
struct CheckRecord {
  std::string check;
  std::string scenario;
  nlohmann::json params = nlohmann::json::object();
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;
  double tolerance = 0.0;

  static CheckRecord make(std::string check, double lhs, double rhs, double tolerance,
                          nlohmann::json params = nlohmann::json::object());
  nlohmann::json to_json() const;
};

struct KeyConstants31 {
  int n = 1;
  double A = 0.0;
  double C4 = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  double Lambda = 0.0;
  double c = 0.0;
  /// Relative residuals of beta eps Lambda^{beta-1} = 1,
  /// eps^{n+2} = ((n+2)/(n+1))^{n+2} Lambda and eps^{n+2} = c^{n+1} A.
  std::array<double, 3> residuals{};
};

/// Closed form: c = C4 (n+2)/(n+1)^2, eps = (c^{n+1} A)^{1/(n+2)}, Lambda = (beta eps)^{n+2}.
KeyConstants31 constants31(int n, double A, double C4);

/// Test function H = -eps (-psi + Lambda)^beta - phi_tilde - s over the window.
struct Lemma31Result {
  double max_H = 0.0;
  double max_H_initial = 0.0;   // on the slice t = t0
  double max_H_interior = 0.0;  // on t > t0 (-inf when the window has one slice)
  double argmax_time = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// phi_tilde and psi must share the window's checkpoint times.
Lemma31Result check_lemma31(const SpaceTimeField& psi, const SpaceTimeField& phi_tilde, double s,
                            const KeyConstants31& k);

struct ExpBoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double lambda = 0.0;
  bool pass = false;
};

/// int int_Omega exp[lambda ((-phi_tilde - s)/A^{1/(n+2)})^{(n+2)/(n+1)}] against
/// int int_Omega exp[lambda c (-psi + Lambda)] with lambda c = alpha.
ExpBoundResult check_exp_bound(const SpaceTimeField& psi, const SpaceTimeField& phi_tilde, double s,
                               const KeyConstants31& k, double alpha);

/// delta_0 = 1 + (p - n - 1)/(p (n + 1)), used as A_s <= B0 phi(s)^{1 + delta_0}.
double delta0_printed(int n, double p);
/// Total exponent the Hoelder step produces: (n+2)/(n+1) - 1/p. Numerically
/// equal to delta0_printed, so the Hoelder route gives phi^{delta0}, not phi^{1+delta0}.
double hoelder_exponent(int n, double p);

struct IterationRow {
  double s = 0.0;
  double r = 0.0;
  double A_s = 0.0;
  double r_phi_s_plus_r = 0.0;
  double phi_s = 0.0;
};

struct IterationResult {
  std::vector<IterationRow> rows;
  double lower_min_slack = 0.0;  // min over rows of A_s - r phi(s+r)
  bool lower_pass = true;
  double delta0 = 0.0;
  /// Smallest B0 with A_s <= B0 phi(s)^{1 + delta0} on the s-grid.
  double B0_measured = 0.0;
  /// Same with the Hoelder exponent in place of 1 + delta0.
  double B0_measured_hoelder = 0.0;
  /// C(E)^{1/p} from the measured Young-side constant.
  double B0_predicted = 0.0;
  bool vacuous = false;
};

/// s-grid of `levels` dyadic points in (0, top) and r in {1/4, 1/2, 1} * spread.
IterationResult check_iteration(const SpaceTimeField& phi_tilde, const ScalarField& F, double t0, double p,
                                int levels = 8);

/// Default Young constant sup_{x>=0}(x^p e^{-2x}) e^2 + 1.
double young_constant_default(double p);

struct YoungResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double orlicz_norm = 0.0;
  double C_p = 0.0;
  bool pass = false;
};

/// int int_Omega v^p e^{nF} <= n^p Ent_p(F) |window| + C_p int int_Omega e^{2v}.
/// v is given per window slice; Omega = {-phi_tilde - s > 0}.
YoungResult check_young(const SpaceTimeField& v, const SpaceTimeField& phi_tilde, const ScalarField& F, double s,
                        const Window& w, double p, double C_p);

/// v = (lambda / 2) ((-phi_tilde - s)_+ / A^{1/(n+2)})^{(n+2)/(n+1)} on the window slices.
SpaceTimeField young_test_function(const SpaceTimeField& phi_tilde, double s, const Window& w, double A,
                                   double lambda);

struct KeyConstants41 {
  int n = 1;
  double p = 0.0;
  int N_cap = 10;
  double C5 = 1.0;
  double Ent_p = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  double Lambda = 0.0;
  double b = 0.0;
  double r_inj = 0.5;
  /// Relative residual of beta eps Lambda^{beta-1} = 1/4 and of the Lambda rule.
  std::array<double, 2> residuals{};
};

/// (1 - beta)(n+1) = p for p < n+1, (n+1)(1 - 1/N_cap) otherwise;
/// Lambda = C5 (1 + Ent_p)^{1/((n+1)(1-beta))}; eps from beta eps Lambda^{beta-1} = 1/4.
KeyConstants41 constants41(int n, double p, double Ent_p, double C5 = 1.0, int N_cap = 10);

/// theta = min{r^2 beta Lambda^{beta-1} / (100 M^{1/b}), r^2 / (100 n)}.
double cutoff_theta(const KeyConstants41& k, double M_val);

/// h_s(x) = x + sqrt(x^2 + s).
double h_smooth(double x, double s);

struct Lemma41Result {
  double max_rho = 0.0;
  double C_target = 0.0;
  double M_val = 0.0;  // sup (h_s(rho)/2)^b at the smallest s
  std::vector<double> s_values;
  /// max |(h_s(rho)/2)^b - rho_+^b| per s.
  std::vector<double> h_errors;
  bool h_converges = false;
  bool pass = false;
};

/// Default target 1/2 max(1, (10 C_dim int int (|phi_tilde| + exp(alpha (-psi+Lambda)^{(1-beta)(n+1)/p})))^{1/((2n+1) b)}).
double lemma41_default_target(const SpaceTimeField& psi, const SpaceTimeField& phi_tilde, const KeyConstants41& k,
                              double alpha, double C_dim);

Lemma41Result check_lemma41(const SpaceTimeField& psi, const SpaceTimeField& phi_tilde, const KeyConstants41& k,
                            double C_target);

/// Minimum of h(x) = (x - r - C3) e^{n x/(r(n+1))}: -(r(n+1)/n) exp((n C3 - r)/(r(n+1))).
double h_chain_minimum(int n, double r, double C3);
double h_chain_argmin(int n, double r, double C3);

/// Maximum of A(y) = y - l y^{1 + 1/a}: a^a / ((a+1)^{a+1} l^a) at y = (a/(l(a+1)))^a.
double A_max_value(double a, double l);
double A_max_point(double a, double l);

/// C7 = (n+1) gamma^{1/(n+1)}.
double C7_constant(int n, double gamma);

struct ChainResult {
  double min_structural_margin = 0.0;  // min det G F^{n/r} - gamma
  /// min over points of (step_k - step_{k+1}) / scale for the three inequalities.
  std::array<double, 3> min_step_slack{};
  std::size_t points = 0;
  bool pass = false;
};

/// Point-wise chain -psi_dot + tr_G omega_psi >= (n+1)(-psi_dot det G det h_psi)^{1/(n+1)}
/// >= C7 f^{1/(n+1)} (e^{rF}/F)^{n/(r(n+1))} >= C7 f^{1/(n+1)} exp(-n phi_dot/(r(n+1)))
/// on matching checkpoints of the flow and an auxiliary run.
ChainResult check_generalized_chain(const FlowTrajectory& flow, const FlowProblem& problem, const AuxWeight& weight,
                                    const AuxTrajectory& aux);

}  // namespace mafl

#pragma once

// Scalar functionals of potentials and trajectories: entropy, I-functional,
// exponential integrals, Green-based bounds, level masses and energies.

#include <optional>
#include <vector>

#include "json.hpp"
#include "mafl/flow.hpp"

namespace mafl {

/// int |F|^p e^{nF}
double entropy_p(const ScalarField& F, double p);

/// Point-wise sum_j sigma_j(lambda) / binom(n, j), the density of
/// sum_j omega_0^{n-j} ^ omega_phi^j against omega_0^n.
ScalarField mixed_volume_density(const ScalarField& phi);

/// I(phi) = 1/(n+1) int phi sum_j omega_0^{n-j} ^ omega_phi^j.
double I_functional(const ScalarField& phi);

/// d/dt I(psi) for a given psi_dot, by the product rule (no integration by parts).
double I_functional_rate(const ScalarField& psi, const ScalarField& psi_dot);

/// int e^{-alpha phi}, evaluated as e^{-alpha inf phi} int e^{-alpha (phi - inf phi)}.
double exp_integral(const ScalarField& phi, double alpha);

struct ExpIntegralSeries {
  std::vector<double> values;
  double sup = 0.0;
};
ExpIntegralSeries exp_integral(const SpaceTimeField& phi, double alpha);

/// Largest alpha in {1, 1/2, ..., 1/64} with int e^{-alpha (phi - sup phi)} <= 10 V
/// on every slice of every trajectory. Throws Infeasible if none qualifies.
double calibrate_alpha(const std::vector<const SpaceTimeField*>& corpus);

/// Time window [t0, t1] resolved against checkpoint times with trapezoid weights.
struct Window {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<std::size_t> indices;
  std::vector<double> weights;
};

/// Window [t0, min(t0 + length, last time)]; both ends must be checkpoint times.
Window make_window(const std::vector<double>& times, double t0, double length = 1.0);

/// sum_j weight_j * g(slice_j) for the slices inside the window.
template <class Fn>
double window_integral(const Window& w, const SpaceTimeField& field, Fn&& g) {
  double total = 0.0;
  for (std::size_t j = 0; j < w.indices.size(); ++j) total += w.weights[j] * g(field.slices[w.indices[j]]);
  return total;
}

/// phi_{t0}(s) = int int 1{-phi_tilde - s > 0} e^{nF} over the window.
double level_mass(const SpaceTimeField& phi_tilde, const ScalarField& F, double s, const Window& w);

/// int int (-phi_tilde)_+^N e^{nF} over the window.
double energy_N(const SpaceTimeField& phi_tilde, const ScalarField& F, const Window& w, double N_exp);

/// energy_N with N = 1.
double window_energy(const SpaceTimeField& phi_tilde, const ScalarField& F, const Window& w);
/// The signed variant int int (-phi_tilde) e^{nF}.
double window_energy_signed(const SpaceTimeField& phi_tilde, const ScalarField& F, const Window& w);

/// Window starts used for E: checkpoints in [0, T - 1], or just 0 when T < 1.
std::vector<double> energy_window_starts(const std::vector<double>& times);

struct EnergySup {
  double E = 0.0;
  double argmax_t0 = 0.0;
};
EnergySup energy_sup(const SpaceTimeField& phi_tilde, const ScalarField& F);

struct Lemma23Result {
  // (1) sup_t mean(phi_dot) <= K
  double mean_rate_sup = 0.0;
  double K = 0.0;
  // Jensen: mean log det h <= log mean det h = 0
  double jensen_lhs = 0.0;
  double jensen_rhs = 0.0;
  // (2) sup phi_tilde <= C3 = n * ||G_shifted||_1
  double sup_tilde = 0.0;
  double C3 = 0.0;
  // (3) int |phi_tilde| <= 2 C3 V
  double l1_tilde = 0.0;
  double l1_bound = 0.0;
};

/// The three normalization bounds for a Theta = log Monge-Ampere trajectory.
Lemma23Result lemma23_checks(const FlowTrajectory& traj, const SourceData& src);

/// The Green representation phi_tilde(x) = int G_shifted(x - y) (-Laplace phi)(y) dy.
ScalarField green_representation(const ScalarField& phi);

/// Every named constant of one scenario.
struct ConstantsLedger {
  double V = 1.0;
  double Ent_p = 0.0;
  double K = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double C3_green = 0.0;
  double C4 = 0.0;
  double C5 = 1.0;
  double C6 = 0.0;
  double C7 = 0.0;
  double alpha = 0.0;
  double E = 0.0;
  // Test-function constants for the level-set lemma at one reference level.
  double beta31 = 0.0, eps31 = 0.0, Lambda31 = 0.0, c31 = 0.0;
  // Weighted test-function constants.
  double beta41 = 0.0, eps41 = 0.0, Lambda41 = 0.0, b = 0.0, theta = 0.0, r_inj = 0.5;

  nlohmann::json to_json() const;
};

/// C4 = (n+1) exp((C3 - 1)/(n+1)).
double C4_from_C3(int n, double C3);

}  // namespace mafl

#pragma once

// Explicit time integration of  d/dt phi = Theta( F(lambda[h_phi]) / e^{r F_src} ).
//
// (Theta = log, F = det) is the Kahler-Ricci flow, (Theta = log, general F)
// the Hessian-quotient flow and (general Theta, F = det) the Theta-profile flow.

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "mafl/operators.hpp"
#include "mafl/torus.hpp"

namespace mafl {

/// Time-independent source term and the hypothesis quantities derived from it.
struct SourceData {
  ScalarField F;
  double p = 2.0;
  double ent_p = 0.0;  // int |F|^p e^{nF}
  double int_nF = 0.0; // int nF
  /// Lower-bound constant: int nF >= -K; for a Theta-profile flow
  /// K = max(0, int Theta(e^{-nF})).
  double K = 0.0;

  static SourceData from_field(ScalarField F, double p,
                               const std::optional<ThetaProfile>& theta = std::nullopt);
};

struct FlowProblem {
  SourceData source;
  OperatorSpec op;
  ThetaProfile theta;
};

struct FlowDiagnostics {
  double min_eigen = 1.0;
  double max_abs_rate = 0.0;
  double stiffness = 0.0;
  double min_structural = 0.0;
};

struct FlowState {
  ScalarField phi;
  double t = 0.0;
  ScalarField phi_tilde;
  double dt_last = 0.0;
  FlowDiagnostics diag;
  /// Rate at (phi, t); reused as the first stage of the next step.
  ScalarField rate;

  static FlowState initial(ScalarField phi0, const FlowProblem& problem);
};

/// Rate field plus the quantities the step-size control needs.
struct RateEvaluation {
  ScalarField rate;
  /// max over points of 1/4 * y Theta'(y) * maxEigen(G).
  double stiffness = 0.0;
  double min_eigen = 0.0;
  double min_structural = 0.0;
};

RateEvaluation evaluate_rate(const ScalarField& phi, const FlowProblem& problem);
ScalarField rhs(const FlowState& state, const FlowProblem& problem);

/// Safety factor applied to the explicit diffusion limit.
inline constexpr double kDtSafety = 0.5;
inline constexpr double kDtFloor = 1e-10;
inline constexpr int kMaxHalvings = 40;

/// dt = safety * h^2 / (2 * 2n * stiffness); +inf when stiffness vanishes.
double stable_dt_for(const TorusGrid& grid, double stiffness);
double stable_dt(const FlowState& state, const FlowProblem& problem);

/// One Shu-Osher SSP-RK3 step. Throws StepRejected when the result (or an
/// intermediate stage) leaves the operator cone.
FlowState step(const FlowState& state, const FlowProblem& problem, double dt);

/// Generic SSP-RK3 update u + dt * L(u) with stage rates supplied by `rate`.
/// `first_rate`, when given, is L(u) at time t.
ScalarField ssp_rk3(const ScalarField& u, double t, double dt,
                    const std::function<ScalarField(const ScalarField&, double)>& rate,
                    const ScalarField* first_rate = nullptr);

/// Spectral radius bound of the linearized rate for a given stiffness:
/// 2n * pi^2 * N^2 * stiffness.
double spectral_radius(const TorusGrid& grid, double stiffness);

/// Number of stages a damped second-order Runge-Kutta-Chebyshev step needs
/// for dt * radius to sit inside its stability interval.
int rkc_stages(double dt, double radius);

/// One second-order Runge-Kutta-Chebyshev step (damping 2/13) with s >= 2 stages.
/// `first_rate` is L(u) at time t.
ScalarField rkc2(const ScalarField& u, double t, double dt, int stages,
                 const std::function<ScalarField(const ScalarField&, double)>& rate,
                 const ScalarField& first_rate);

struct CheckpointDiagnostics {
  double time = 0.0;
  double sup_tilde = 0.0;
  double inf_tilde = 0.0;
  double mean_rate = 0.0;       // (1/V) int phi_dot
  double int_abs_tilde = 0.0;   // int |phi_tilde|
  double rate_mass = 0.0;       // int phi_dot * det(h) (i.e. against omega_phi^n)
  double min_eigen = 0.0;
  double max_abs_rate = 0.0;
  double min_structural = 0.0;
  double max_rate = 0.0;
  double high_freq = 0.0;
};

/// Diagnostics are a pure function of the slice, so they can be recomputed
/// from checkpoints.
CheckpointDiagnostics diagnose(const ScalarField& phi, double t, const FlowProblem& problem);

struct FlowTrajectory {
  explicit FlowTrajectory(const TorusGrid& g) : phi(g), phi_tilde(g) {}
  SpaceTimeField phi;
  SpaceTimeField phi_tilde;
  std::vector<CheckpointDiagnostics> diagnostics;
  std::size_t steps = 0;
  std::size_t rejections = 0;
  /// min of det G * F^{n/r} over every accepted step (and the initial state).
  double min_structural_all_steps = std::numeric_limits<double>::infinity();
};

struct RunOptions {
  double T = 1.0;
  double checkpoint_every = 0.1;
  /// Reject the run if a checkpoint carries more high-frequency energy than this.
  double max_high_freq = 1e-6;
  std::function<void(const FlowState&)> on_checkpoint;
};

/// Checkpoint times j * checkpoint_every, j = 0..round(T / checkpoint_every).
std::vector<double> checkpoint_times(double T, double every);

FlowTrajectory run_flow(const ScalarField& phi0, const FlowProblem& problem, const RunOptions& options);

/// Rebuilds a trajectory (normalizations and diagnostics) from stored slices.
FlowTrajectory trajectory_from_slices(const SpaceTimeField& phi, const FlowProblem& problem);

}  // namespace mafl

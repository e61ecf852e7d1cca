#include "mafl/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mafl {

SourceData SourceData::from_field(ScalarField F, double p, const std::optional<ThetaProfile>& theta) {
  require_finite(F, "source F");
  if (!(p > 1.0)) throw Error(ErrorKind::InvalidArgument, "entropy exponent p must exceed 1");
  const int n = F.grid.dim();
  SourceData src{std::move(F), p, 0.0, 0.0, 0.0};
  const ThetaProfile profile = theta.value_or(ThetaProfile::log());
  ScalarField integrand = ScalarField::constant(src.F.grid, 0.0);
  ScalarField theta_term = integrand;
  for (std::size_t i = 0; i < src.F.size(); ++i) {
    const double f = src.F[i];
    integrand[i] = std::pow(std::abs(f), p) * std::exp(n * f);
    theta_term[i] = profile.value(std::exp(-n * f));
  }
  src.ent_p = integrate(integrand);
  src.int_nF = n * integrate(src.F);
  src.K = std::max(0.0, integrate(theta_term));
  if (!std::isfinite(src.ent_p)) throw Error(ErrorKind::NonFinite, "entropy of F is not finite");
  return src;
}

FlowState FlowState::initial(ScalarField phi0, const FlowProblem& problem) {
  require_finite(phi0, "initial potential");
  FlowState s{phi0, 0.0, mean_normalize(phi0), 0.0, {}, {}};
  auto eval = evaluate_rate(s.phi, problem);
  s.diag = {eval.min_eigen, eval.rate.max_abs(), eval.stiffness, eval.min_structural};
  s.rate = std::move(eval.rate);
  return s;
}

RateEvaluation evaluate_rate(const ScalarField& phi, const FlowProblem& problem) {
  const auto& grid = phi.grid;
  const int n = grid.dim();
  const auto& F = problem.source.F;
  require_same_grid(phi, F);
  if (n != problem.op.n) throw Error(ErrorKind::InvalidArgument, "operator dimension differs from grid");
  const HermitianHessianField h = complex_hessian(phi);
  const double r = problem.op.degree();

  RateEvaluation out{ScalarField::constant(grid, 0.0), 0.0, std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const OperatorPoint pt = evaluate_point(problem.op, h.matrices[i], h.lambda(i));
    const double y = pt.F / std::exp(r * F[i]);
    out.rate[i] = problem.theta.value(y);
    const double coeff = kDdbarScale * problem.theta.log_slope(y) * pt.G_max_eigen;
    out.stiffness = std::max(out.stiffness, coeff);
    out.min_eigen = std::min(out.min_eigen, h.eigenvalues[i][0]);
    out.min_structural = std::min(out.min_structural, pt.structural);
  }
  require_finite(out.rate, "flow rate");
  return out;
}

ScalarField rhs(const FlowState& state, const FlowProblem& problem) {
  return evaluate_rate(state.phi, problem).rate;
}

double stable_dt_for(const TorusGrid& grid, double stiffness) {
  if (!(stiffness > 0.0)) return std::numeric_limits<double>::infinity();
  const double h = grid.spacing();
  return kDtSafety * h * h / (2.0 * grid.real_axes() * stiffness);
}

double stable_dt(const FlowState& state, const FlowProblem& problem) {
  return stable_dt_for(state.phi.grid, evaluate_rate(state.phi, problem).stiffness);
}

ScalarField ssp_rk3(const ScalarField& u, double t, double dt,
                    const std::function<ScalarField(const ScalarField&, double)>& rate,
                    const ScalarField* first_rate) {
  const std::size_t m = u.size();
  ScalarField stage = u;
  {
    const ScalarField L0 = first_rate ? *first_rate : rate(u, t);
    for (std::size_t i = 0; i < m; ++i) stage[i] = u[i] + dt * L0[i];
  }
  {
    const ScalarField L1 = rate(stage, t + dt);
    for (std::size_t i = 0; i < m; ++i) stage[i] = 0.75 * u[i] + 0.25 * (stage[i] + dt * L1[i]);
  }
  {
    const ScalarField L2 = rate(stage, t + 0.5 * dt);
    for (std::size_t i = 0; i < m; ++i)
      stage[i] = u[i] / 3.0 + 2.0 / 3.0 * (stage[i] + dt * L2[i]);
  }
  return stage;
}

double spectral_radius(const TorusGrid& grid, double stiffness) {
  const double N = grid.resolution();
  return grid.real_axes() * std::numbers::pi * std::numbers::pi * N * N * stiffness;
}

namespace {
constexpr double kRkcDamping = 2.0 / 13.0;

// Chebyshev polynomial T_j(x) and its first two derivatives for x > 1.
struct Cheb {
  double T, dT, d2T;
};
Cheb chebyshev(int j, double x) {
  double T0 = 1.0, T1 = x, d0 = 0.0, d1 = 1.0, dd0 = 0.0, dd1 = 0.0;
  if (j == 0) return {T0, d0, dd0};
  for (int m = 1; m < j; ++m) {
    const double T2 = 2.0 * x * T1 - T0;
    const double d2 = 2.0 * T1 + 2.0 * x * d1 - d0;
    const double dd2 = 4.0 * d1 + 2.0 * x * dd1 - dd0;
    T0 = T1, T1 = T2, d0 = d1, d1 = d2, dd0 = dd1, dd1 = dd2;
  }
  return {T1, d1, dd1};
}
}  // namespace

int rkc_stages(double dt, double radius) {
  // Stability interval of the damped scheme is about 0.653 s^2; keep 20% slack.
  const double need = 1.2 * dt * radius / 0.653;
  return std::max(2, static_cast<int>(std::ceil(std::sqrt(1.0 + need))));
}

ScalarField rkc2(const ScalarField& u, double t, double dt, int s,
                 const std::function<ScalarField(const ScalarField&, double)>& rate,
                 const ScalarField& first_rate) {
  if (s < 2) throw Error(ErrorKind::InvalidArgument, "RKC needs at least two stages");
  const std::size_t m = u.size();
  const double w0 = 1.0 + kRkcDamping / (static_cast<double>(s) * s);
  const Cheb Ts = chebyshev(s, w0);
  const double w1 = Ts.dT / Ts.d2T;
  std::vector<double> b(s + 1), c(s + 1);
  for (int j = 2; j <= s; ++j) {
    const Cheb Tj = chebyshev(j, w0);
    b[j] = Tj.d2T / (Tj.dT * Tj.dT);
  }
  b[0] = b[1] = b[2];
  c[0] = 0.0;
  c[s] = 1.0;
  for (int j = 2; j < s; ++j) {
    const Cheb Tj = chebyshev(j, w0);
    c[j] = w1 * Tj.d2T / Tj.dT;
  }
  c[1] = c[2] / (4.0 * w0);  // = c2 / T2'(w0)

  ScalarField prev2 = u;
  ScalarField prev = u;
  const double mu1 = b[1] * w1;
  for (std::size_t i = 0; i < m; ++i) prev[i] = u[i] + mu1 * dt * first_rate[i];
  for (int j = 2; j <= s; ++j) {
    const Cheb Tjm1 = chebyshev(j - 1, w0);
    const double mu = 2.0 * b[j] * w0 / b[j - 1];
    const double nu = -b[j] / b[j - 2];
    const double mut = 2.0 * b[j] * w1 / b[j - 1];
    const double gam = -(1.0 - b[j - 1] * Tjm1.T) * mut;
    const ScalarField L = rate(prev, t + c[j - 1] * dt);
    ScalarField next = prev;
    for (std::size_t i = 0; i < m; ++i)
      next[i] = (1.0 - mu - nu) * u[i] + mu * prev[i] + nu * prev2[i] + mut * dt * L[i] + gam * dt * first_rate[i];
    prev2 = std::move(prev);
    prev = std::move(next);
  }
  return prev;
}

FlowState step(const FlowState& state, const FlowProblem& problem, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  ScalarField next;
  try {
    next = ssp_rk3(state.phi, state.t, dt, [&](const ScalarField& u, double) {
      return evaluate_rate(u, problem).rate;
    }, state.rate.size() == state.phi.size() ? &state.rate : nullptr);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConeViolation || e.kind() == ErrorKind::NonFinite)
      throw Error(ErrorKind::StepRejected, "stage left the admissible cone at t=" +
                                               std::to_string(state.t) + ": " + e.what());
    throw;
  }
  FlowState out{std::move(next), state.t + dt, {}, dt, {}, {}};
  try {
    auto eval = evaluate_rate(out.phi, problem);
    out.diag = {eval.min_eigen, eval.rate.max_abs(), eval.stiffness, eval.min_structural};
    out.rate = std::move(eval.rate);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConeViolation || e.kind() == ErrorKind::NonFinite)
      throw Error(ErrorKind::StepRejected, "step result left the admissible cone at t=" +
                                               std::to_string(out.t));
    throw;
  }
  out.phi_tilde = mean_normalize(out.phi);
  return out;
}

CheckpointDiagnostics diagnose(const ScalarField& phi, double t, const FlowProblem& problem) {
  const auto eval = evaluate_rate(phi, problem);
  const ScalarField tilde = mean_normalize(phi);
  const HermitianHessianField h = complex_hessian(phi);
  const int n = phi.grid.dim();
  ScalarField det = ScalarField::constant(phi.grid, 0.0);
  ScalarField abs_tilde = det;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    det[i] = h.matrices[i].det(n);
    abs_tilde[i] = std::abs(tilde[i]);
  }
  CheckpointDiagnostics d;
  d.time = t;
  d.sup_tilde = tilde.max();
  d.inf_tilde = tilde.min();
  d.mean_rate = mean(eval.rate);
  d.int_abs_tilde = integrate(abs_tilde);
  d.rate_mass = integrate(eval.rate, det);
  d.min_eigen = eval.min_eigen;
  d.max_abs_rate = eval.rate.max_abs();
  d.min_structural = eval.min_structural;
  d.max_rate = eval.rate.max();
  d.high_freq = high_frequency_fraction(phi);
  return d;
}

std::vector<double> checkpoint_times(double T, double every) {
  if (!(T > 0.0) || !(every > 0.0))
    throw Error(ErrorKind::InvalidArgument, "final time and checkpoint interval must be positive");
  const long count = std::max(1L, std::lround(T / every));
  std::vector<double> times;
  for (long j = 0; j <= count; ++j) times.push_back(j == count ? T : j * every);
  return times;
}

FlowTrajectory run_flow(const ScalarField& phi0, const FlowProblem& problem, const RunOptions& options) {
  const auto times = checkpoint_times(options.T, options.checkpoint_every);
  FlowTrajectory traj(phi0.grid);
  FlowState state = FlowState::initial(phi0, problem);

  auto record = [&](const FlowState& s) {
    CheckpointDiagnostics d = diagnose(s.phi, s.t, problem);
    if (d.high_freq > options.max_high_freq)
      throw Error(ErrorKind::Unresolved, "high-frequency energy fraction " + std::to_string(d.high_freq) +
                                             " at t=" + std::to_string(s.t) + " exceeds " +
                                             std::to_string(options.max_high_freq));
    traj.phi.push_back(s.t, s.phi);
    traj.phi_tilde.push_back(s.t, s.phi_tilde);
    traj.diagnostics.push_back(d);
    if (options.on_checkpoint) options.on_checkpoint(s);
  };
  record(state);
  traj.min_structural_all_steps = state.diag.min_structural;

  for (std::size_t j = 1; j < times.size(); ++j) {
    const double target = times[j];
    while (state.t < target) {
      double dt = std::min(stable_dt_for(state.phi.grid, state.diag.stiffness), target - state.t);
      for (int attempt = 0;; ++attempt) {
        try {
          FlowState next = step(state, problem, dt);
          if (target - next.t <= 1e-12 * std::max(1.0, target)) next.t = target;
          state = std::move(next);
          ++traj.steps;
          traj.min_structural_all_steps = std::min(traj.min_structural_all_steps, state.diag.min_structural);
          break;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::StepRejected) throw;
          ++traj.rejections;
          dt *= 0.5;
          if (dt < kDtFloor || attempt + 1 >= kMaxHalvings)
            throw Error(ErrorKind::DtUnderflow,
                        "time step underflow at t=" + std::to_string(state.t) + " (" + e.what() + ")");
        }
      }
    }
    record(state);
  }
  return traj;
}

FlowTrajectory trajectory_from_slices(const SpaceTimeField& phi, const FlowProblem& problem) {
  FlowTrajectory traj(phi.grid);
  for (std::size_t j = 0; j < phi.size(); ++j) {
    traj.phi.push_back(phi.times[j], phi.slices[j]);
    traj.phi_tilde.push_back(phi.times[j], mean_normalize(phi.slices[j]));
    traj.diagnostics.push_back(diagnose(phi.slices[j], phi.times[j], problem));
  }
  return traj;
}

}  // namespace mafl

#include "mafl/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mafl/error.hpp"

namespace mafl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ScalarField exp_nF(const ScalarField& F) {
  const int n = F.grid.dim();
  ScalarField e = F;
  for (auto& v : e.values) v = std::exp(n * v);
  return e;
}

std::size_t slice_at(const SpaceTimeField& f, double t) {
  for (std::size_t j = 0; j < f.size(); ++j)
    if (std::abs(f.times[j] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return j;
  throw Error(ErrorKind::WindowMismatch, "no slice at t=" + std::to_string(t));
}

// Trapezoid weights over all times of a field.
Window full_window(const SpaceTimeField& f) {
  if (f.size() == 0) throw Error(ErrorKind::WindowMismatch, "empty trajectory");
  return make_window(f.times, f.times.front(), f.times.back() - f.times.front());
}

double rel(double value, double target) { return std::abs(value - target) / std::max(std::abs(target), 1e-300); }

}  // namespace

CheckRecord CheckRecord::make(std::string check, double lhs, double rhs, double tolerance, nlohmann::json params) {
  CheckRecord r;
  r.check = std::move(check);
  r.params = std::move(params);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = lhs - rhs;
  r.tolerance = tolerance;
  r.pass = r.margin <= tolerance;
  return r;
}

nlohmann::json CheckRecord::to_json() const {
  return nlohmann::json{{"check", check},   {"scenario", scenario}, {"params", params},
                        {"lhs", lhs},       {"rhs", rhs},           {"margin", margin},
                        {"pass", pass},     {"tolerance", tolerance}};
}

KeyConstants31 constants31(int n, double A, double C4) {
  if (n != 1 && n != 2) throw Error(ErrorKind::UnsupportedDimension, "n must be 1 or 2");
  if (!(A > 0.0) || !(C4 > 0.0)) throw Error(ErrorKind::InvalidArgument, "A and C4 must be positive");
  KeyConstants31 k;
  k.n = n;
  k.A = A;
  k.C4 = C4;
  k.beta = (n + 1.0) / (n + 2.0);
  k.c = C4 * (n + 2.0) / ((n + 1.0) * (n + 1.0));
  k.epsilon = std::pow(std::pow(k.c, n + 1) * A, 1.0 / (n + 2));
  k.Lambda = std::pow(k.beta * k.epsilon, n + 2);
  const double eps_pow = std::pow(k.epsilon, n + 2);
  k.residuals[0] = rel(k.beta * k.epsilon * std::pow(k.Lambda, k.beta - 1.0), 1.0);
  k.residuals[1] = rel(eps_pow, std::pow((n + 2.0) / (n + 1.0), n + 2) * k.Lambda);
  k.residuals[2] = rel(eps_pow, std::pow(k.c, n + 1) * A);
  return k;
}

Lemma31Result check_lemma31(const SpaceTimeField& psi, const SpaceTimeField& phi_tilde, double s,
                            const KeyConstants31& k) {
  if (!(psi.grid == phi_tilde.grid)) throw Error(ErrorKind::GridMismatch, "psi and phi_tilde grids differ");
  if (psi.size() == 0) throw Error(ErrorKind::WindowMismatch, "empty auxiliary trajectory");
  Lemma31Result out{kNegInf, kNegInf, kNegInf, 0.0, 0.0, false};
  double sup_abs = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const ScalarField& p = psi.slices[j];
    const ScalarField& ph = phi_tilde.slices[slice_at(phi_tilde, psi.times[j])];
    sup_abs = std::max(sup_abs, ph.max_abs());
    double slice_max = kNegInf;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double H = -k.epsilon * std::pow(std::max(0.0, -p[i] + k.Lambda), k.beta) - ph[i] - s;
      slice_max = std::max(slice_max, H);
    }
    if (j == 0) out.max_H_initial = slice_max;
    else out.max_H_interior = std::max(out.max_H_interior, slice_max);
    if (slice_max > out.max_H) {
      out.max_H = slice_max;
      out.argmax_time = psi.times[j];
    }
  }
  out.tolerance = 1e-4 * (1.0 + sup_abs);
  out.pass = out.max_H <= out.tolerance;
  return out;
}

ExpBoundResult check_exp_bound(const SpaceTimeField& psi, const SpaceTimeField& phi_tilde, double s,
                               const KeyConstants31& k, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  const int n = k.n;
  ExpBoundResult out;
  out.lambda = alpha / k.c;
  const double scale = std::pow(k.A, 1.0 / (n + 2));
  const double expo = (n + 2.0) / (n + 1.0);
  const Window w = full_window(psi);
  for (std::size_t j = 0; j < w.indices.size(); ++j) {
    const ScalarField& p = psi.slices[w.indices[j]];
    const ScalarField& ph = phi_tilde.slices[slice_at(phi_tilde, psi.times[w.indices[j]])];
    ScalarField lhs = ScalarField::constant(p.grid, 0.0), rhs = lhs;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double x = -ph[i] - s;
      if (x <= 0.0) continue;
      lhs[i] = std::exp(out.lambda * std::pow(x / scale, expo));
      rhs[i] = std::exp(alpha * (-p[i] + k.Lambda));
    }
    out.lhs += w.weights[j] * integrate(lhs);
    out.rhs += w.weights[j] * integrate(rhs);
  }
  out.pass = out.lhs <= out.rhs * (1.0 + 1e-6);
  return out;
}

double delta0_printed(int n, double p) { return 1.0 + (p - n - 1.0) / (p * (n + 1.0)); }

double hoelder_exponent(int n, double p) { return (n + 2.0) / (n + 1.0) - 1.0 / p; }

IterationResult check_iteration(const SpaceTimeField& phi_tilde, const ScalarField& F, double t0, double p,
                                int levels) {
  const int n = F.grid.dim();
  if (!(p > n + 1.0)) throw Error(ErrorKind::InvalidArgument, "iteration check needs p > n + 1");
  if (levels < 1) throw Error(ErrorKind::InvalidArgument, "levels must be positive");
  const Window w = make_window(phi_tilde.times, t0);
  const ScalarField e = exp_nF(F);

  IterationResult out;
  out.delta0 = delta0_printed(n, p);
  double top = kNegInf;
  for (std::size_t idx : w.indices) top = std::max(top, -phi_tilde.slices[idx].min());
  if (!(top > 0.0)) {
    out.vacuous = true;
    return out;
  }

  auto A_of = [&](double s) {
    return window_integral(w, phi_tilde, [&](const ScalarField& ph) {
      ScalarField g = ph;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::max(0.0, -ph[i] - s) * e[i];
      return integrate(g);
    });
  };
  const double q = (n + 2.0) * p / (n + 1.0);
  auto moment = [&](double s) {
    return window_integral(w, phi_tilde, [&](const ScalarField& ph) {
      ScalarField g = ph;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::pow(std::max(0.0, -ph[i] - s), q) * e[i];
      return integrate(g);
    });
  };

  out.lower_min_slack = std::numeric_limits<double>::infinity();
  double C_E = 0.0;
  for (int l = 0; l < levels; ++l) {
    const double s = top * (1.0 - std::ldexp(1.0, -l));
    const double A_s = A_of(s);
    const double phi_s = level_mass(phi_tilde, F, s, w);
    if (phi_s > 0.0) {
      out.B0_measured = std::max(out.B0_measured, A_s / std::pow(phi_s, 1.0 + out.delta0));
      out.B0_measured_hoelder = std::max(out.B0_measured_hoelder, A_s / std::pow(phi_s, hoelder_exponent(n, p)));
    }
    if (A_s > 0.0) C_E = std::max(C_E, moment(s) / std::pow(A_s, p / (n + 1.0)));
    for (double frac : {0.25, 0.5, 1.0}) {
      const double r = frac * top;
      IterationRow row{s, r, A_s, r * level_mass(phi_tilde, F, s + r, w), phi_s};
      out.lower_min_slack = std::min(out.lower_min_slack, row.A_s - row.r_phi_s_plus_r);
      out.rows.push_back(row);
    }
  }
  out.lower_pass = out.lower_min_slack >= -1e-12;
  out.B0_predicted = std::pow(C_E, 1.0 / p);
  return out;
}

double young_constant_default(double p) {
  // x^p e^{-2x} peaks at x = p/2.
  const double x = 0.5 * p;
  return std::pow(x, p) * std::exp(-2.0 * x) * std::exp(2.0) + 1.0;
}

SpaceTimeField young_test_function(const SpaceTimeField& phi_tilde, double s, const Window& w, double A,
                                   double lambda) {
  const int n = phi_tilde.grid.dim();
  const double scale = std::pow(A, 1.0 / (n + 2));
  const double expo = (n + 2.0) / (n + 1.0);
  SpaceTimeField v(phi_tilde.grid);
  for (std::size_t idx : w.indices) {
    ScalarField slice = phi_tilde.slices[idx];
    for (auto& x : slice.values) x = 0.5 * lambda * std::pow(std::max(0.0, -x - s) / scale, expo);
    v.push_back(phi_tilde.times[idx], std::move(slice));
  }
  return v;
}

YoungResult check_young(const SpaceTimeField& v, const SpaceTimeField& phi_tilde, const ScalarField& F, double s,
                        const Window& w, double p, double C_p) {
  if (v.size() != w.indices.size()) throw Error(ErrorKind::WindowMismatch, "v must have one slice per window slice");
  const int n = F.grid.dim();
  const ScalarField e = exp_nF(F);
  YoungResult out;
  out.C_p = C_p;
  out.orlicz_norm = std::pow(n, p) * entropy_p(F, p) * (w.t1 - w.t0);
  double exp_part = 0.0;
  for (std::size_t j = 0; j < w.indices.size(); ++j) {
    const ScalarField& ph = phi_tilde.slices[w.indices[j]];
    const ScalarField& vj = v.slices[j];
    ScalarField lhs = ScalarField::constant(F.grid, 0.0), rhs = lhs;
    for (std::size_t i = 0; i < ph.size(); ++i) {
      if (-ph[i] - s <= 0.0) continue;
      lhs[i] = std::pow(vj[i], p) * e[i];
      rhs[i] = std::exp(2.0 * vj[i]);
    }
    out.lhs += w.weights[j] * integrate(lhs);
    exp_part += w.weights[j] * integrate(rhs);
  }
  out.rhs = out.orlicz_norm + C_p * exp_part;
  out.pass = out.lhs <= out.rhs;
  return out;
}

KeyConstants41 constants41(int n, double p, double Ent_p, double C5, int N_cap) {
  if (n != 1 && n != 2) throw Error(ErrorKind::UnsupportedDimension, "n must be 1 or 2");
  if (!(p > 0.0) || !(C5 > 0.0) || N_cap < 2 || !(Ent_p >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "constants41 needs p > 0, C5 > 0, N_cap >= 2, Ent_p >= 0");
  KeyConstants41 k;
  k.n = n;
  k.p = p;
  k.N_cap = N_cap;
  k.C5 = C5;
  k.Ent_p = Ent_p;
  const double q = p < n + 1.0 ? p : (n + 1.0) * (1.0 - 1.0 / N_cap);
  k.beta = 1.0 - q / (n + 1.0);
  if (!(k.beta > 0.0 && k.beta < 1.0))
    throw Error(ErrorKind::Infeasible, "beta rule gives " + std::to_string(k.beta) + " outside (0, 1)");
  k.Lambda = C5 * std::pow(1.0 + Ent_p, 1.0 / q);
  k.epsilon = std::pow(k.Lambda, 1.0 - k.beta) / (4.0 * k.beta);
  k.b = 1.0 + 1.0 / (2.0 * n + 2.0);
  k.r_inj = 0.5;
  k.residuals[0] = rel(k.beta * k.epsilon * std::pow(k.Lambda, k.beta - 1.0), 0.25);
  k.residuals[1] = rel(std::pow(k.Lambda / C5, q), 1.0 + Ent_p);
  return k;
}

double cutoff_theta(const KeyConstants41& k, double M_val) {
  const double r2 = k.r_inj * k.r_inj;
  const double second = r2 / (100.0 * k.n);
  if (!(M_val > 0.0)) return second;
  const double first = r2 * k.beta * std::pow(k.Lambda, k.beta - 1.0) / (100.0 * std::pow(M_val, 1.0 / k.b));
  return std::min(first, second);
}

double h_smooth(double x, double s) { return x + std::sqrt(x * x + s); }

double lemma41_default_target(const SpaceTimeField& psi, const SpaceTimeField& phi_tilde, const KeyConstants41& k,
                              double alpha, double C_dim) {
  const int n = k.n;
  const double expo = (1.0 - k.beta) * (n + 1.0) / k.p;
  const Window w = full_window(psi);
  double total = 0.0;
  for (std::size_t j = 0; j < w.indices.size(); ++j) {
    const ScalarField& p = psi.slices[w.indices[j]];
    const ScalarField& ph = phi_tilde.slices[slice_at(phi_tilde, psi.times[w.indices[j]])];
    ScalarField g = p;
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = std::abs(ph[i]) + std::exp(alpha * std::pow(std::max(0.0, -p[i] + k.Lambda), expo));
    total += w.weights[j] * integrate(g);
  }
  return 0.5 * std::max(1.0, std::pow(10.0 * C_dim * total, 1.0 / ((2.0 * n + 1.0) * k.b)));
}

Lemma41Result check_lemma41(const SpaceTimeField& psi, const SpaceTimeField& phi_tilde, const KeyConstants41& k,
                            double C_target) {
  if (!(psi.grid == phi_tilde.grid)) throw Error(ErrorKind::GridMismatch, "psi and phi_tilde grids differ");
  if (psi.size() == 0) throw Error(ErrorKind::WindowMismatch, "empty auxiliary trajectory");
  Lemma41Result out;
  out.C_target = C_target;
  out.s_values = {1e-2, 1e-4};
  out.h_errors.assign(out.s_values.size(), 0.0);
  out.max_rho = kNegInf;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const ScalarField& p = psi.slices[j];
    const ScalarField& ph = phi_tilde.slices[slice_at(phi_tilde, psi.times[j])];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double rho = -k.epsilon * std::pow(std::max(0.0, -p[i] + k.Lambda), k.beta) - ph[i];
      out.max_rho = std::max(out.max_rho, rho);
      const double exact = std::pow(std::max(0.0, rho), k.b);
      for (std::size_t m = 0; m < out.s_values.size(); ++m) {
        const double approx = std::pow(0.5 * h_smooth(rho, out.s_values[m]), k.b);
        out.h_errors[m] = std::max(out.h_errors[m], std::abs(approx - exact));
        if (m + 1 == out.s_values.size()) out.M_val = std::max(out.M_val, approx);
      }
    }
  }
  bool at_zero = true;
  for (double s : out.s_values) at_zero = at_zero && std::abs(h_smooth(0.0, s) - std::sqrt(s)) <= 1e-15;
  out.h_converges = at_zero && out.h_errors.back() < out.h_errors.front();
  out.pass = out.max_rho <= C_target && out.h_converges;
  return out;
}

double h_chain_argmin(int n, double r, double C3) { return r + C3 - r * (n + 1.0) / n; }

double h_chain_minimum(int n, double r, double C3) {
  return -(r * (n + 1.0) / n) * std::exp((n * C3 - r) / (r * (n + 1.0)));
}

double A_max_point(double a, double l) { return std::pow(a / (l * (a + 1.0)), a); }

double A_max_value(double a, double l) { return std::pow(a, a) / (std::pow(a + 1.0, a + 1.0) * std::pow(l, a)); }

double C7_constant(int n, double gamma) { return (n + 1.0) * std::pow(gamma, 1.0 / (n + 1.0)); }

ChainResult check_generalized_chain(const FlowTrajectory& flow, const FlowProblem& problem, const AuxWeight& weight,
                                    const AuxTrajectory& aux) {
  const int n = problem.op.n;
  const double r = problem.op.degree();
  const double gamma = problem.op.gamma;
  const double C7 = C7_constant(n, gamma);
  const ScalarField& F = problem.source.F;
  const ScalarField e = exp_nF(F);

  ChainResult out;
  out.min_structural_margin = std::numeric_limits<double>::infinity();
  out.min_step_slack.fill(std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < aux.psi.size(); ++j) {
    const double t = aux.psi.times[j];
    const ScalarField& phi = flow.phi.slices[slice_at(flow.phi, t)];
    const ScalarField& psi = aux.psi.slices[j];
    const ScalarField f = weight.at(t);
    const auto hphi = complex_hessian(phi);
    const auto hpsi = complex_hessian(psi);
    const ScalarField phi_dot = evaluate_rate(phi, problem).rate;
    const ScalarField psi_dot = aux_rate(psi, f, e).rate;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const OperatorPoint pt = evaluate_point(problem.op, hphi.matrices[i], hphi.lambda(i));
      out.min_structural_margin = std::min(out.min_structural_margin, pt.structural - gamma);
      const HermitianMatrix& G = pt.G;
      const HermitianMatrix& H = hpsi.matrices[i];
      const double trGH =
          n == 1 ? G.a * H.a : G.a * H.a + G.d * H.d + 2.0 * (G.c * std::conj(H.c)).real();
      const double fi = std::max(0.0, f[i]);
      const double root = 1.0 / (n + 1.0);
      const double a = -psi_dot[i] + trGH;
      const double b = (n + 1.0) * std::pow(std::max(0.0, -psi_dot[i] * G.det(n) * H.det(n)), root);
      const double c = C7 * std::pow(fi, root) * std::pow(std::exp(r * F[i]) / pt.F, n / (r * (n + 1.0)));
      const double d = C7 * std::pow(fi, root) * std::exp(-n * phi_dot[i] / (r * (n + 1.0)));
      const std::array<double, 4> chain{a, b, c, d};
      for (int m = 0; m < 3; ++m) {
        const double slack = (chain[m] - chain[m + 1]) / std::max(1.0, std::abs(chain[m]));
        out.min_step_slack[m] = std::min(out.min_step_slack[m], slack);
      }
      ++out.points;
    }
  }
  out.pass = out.min_structural_margin >= -1e-8 &&
             std::all_of(out.min_step_slack.begin(), out.min_step_slack.end(), [](double x) { return x >= -1e-10; });
  return out;
}

}  // namespace mafl

#include "mafl/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mafl {

double entropy_p(const ScalarField& F, double p) {
  if (!(p > 1.0)) throw Error(ErrorKind::InvalidArgument, "entropy exponent p must exceed 1");
  const int n = F.grid.dim();
  ScalarField g = F;
  for (auto& v : g.values) v = std::pow(std::abs(v), p) * std::exp(n * v);
  return integrate(g);
}

ScalarField mixed_volume_density(const ScalarField& phi) {
  const int n = phi.grid.dim();
  const auto h = complex_hessian(phi);
  ScalarField out = ScalarField::constant(phi.grid, 0.0);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const auto& m = h.matrices[i];
    out[i] = n == 1 ? 1.0 + m.a : 1.0 + 0.5 * m.trace(2) + m.det(2);
  }
  return out;
}

double I_functional(const ScalarField& phi) {
  require_finite(phi, "potential");
  const int n = phi.grid.dim();
  return integrate(phi, mixed_volume_density(phi)) / (n + 1);
}

double I_functional_rate(const ScalarField& psi, const ScalarField& psi_dot) {
  require_same_grid(psi, psi_dot);
  const int n = psi.grid.dim();
  const auto h = complex_hessian(psi);
  const auto dh = complex_hessian_raw(psi_dot);
  const ScalarField density = mixed_volume_density(psi);
  ScalarField d_density = ScalarField::constant(psi.grid, 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const auto& m = h.matrices[i];
    const auto& e = dh.matrices[i];
    if (n == 1) {
      d_density[i] = e.a;
    } else {
      const double ddet = e.a * m.d + m.a * e.d - 2.0 * (std::conj(m.c) * e.c).real();
      d_density[i] = 0.5 * e.trace(2) + ddet;
    }
  }
  return (integrate(psi_dot, density) + integrate(psi, d_density)) / (n + 1);
}

double exp_integral(const ScalarField& phi, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  const double low = phi.min();
  ScalarField g = phi;
  for (auto& v : g.values) v = std::exp(-alpha * (v - low));
  return std::exp(-alpha * low) * integrate(g);
}

ExpIntegralSeries exp_integral(const SpaceTimeField& phi, double alpha) {
  ExpIntegralSeries out;
  out.sup = -std::numeric_limits<double>::infinity();
  for (const auto& s : phi.slices) {
    out.values.push_back(exp_integral(s, alpha));
    out.sup = std::max(out.sup, out.values.back());
  }
  if (out.values.empty()) out.sup = 0.0;
  return out;
}

double calibrate_alpha(const std::vector<const SpaceTimeField*>& corpus) {
  for (int j = 0; j <= 6; ++j) {
    const double alpha = std::ldexp(1.0, -j);
    bool ok = true;
    for (const auto* traj : corpus) {
      for (const auto& s : traj->slices) {
        ScalarField g = s;
        const double top = s.max();
        for (auto& v : g.values) v = std::exp(-alpha * (v - top));
        if (integrate(g) > 10.0 * s.grid.volume()) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) return alpha;
  }
  throw Error(ErrorKind::Infeasible, "no alpha in the dyadic sweep keeps the exponential integral below 10 V");
}

Window make_window(const std::vector<double>& times, double t0, double length) {
  if (times.empty()) throw Error(ErrorKind::WindowMismatch, "trajectory has no slices");
  const double tol = 1e-9;
  Window w;
  w.t0 = t0;
  w.t1 = std::min(t0 + length, times.back());
  if (t0 < times.front() - tol || t0 > times.back() + tol)
    throw Error(ErrorKind::WindowMismatch, "window start " + std::to_string(t0) + " outside the trajectory");
  for (std::size_t j = 0; j < times.size(); ++j)
    if (times[j] >= t0 - tol && times[j] <= w.t1 + tol) w.indices.push_back(j);
  if (w.indices.empty() || std::abs(times[w.indices.front()] - t0) > tol ||
      std::abs(times[w.indices.back()] - w.t1) > tol)
    throw Error(ErrorKind::WindowMismatch, "window ends must be checkpoint times");
  w.weights.assign(w.indices.size(), 0.0);
  for (std::size_t j = 0; j + 1 < w.indices.size(); ++j) {
    const double dt = times[w.indices[j + 1]] - times[w.indices[j]];
    w.weights[j] += 0.5 * dt;
    w.weights[j + 1] += 0.5 * dt;
  }
  return w;
}

namespace {
ScalarField exp_nF(const ScalarField& F) {
  const int n = F.grid.dim();
  ScalarField e = F;
  for (auto& v : e.values) v = std::exp(n * v);
  return e;
}
}  // namespace

double level_mass(const SpaceTimeField& phi_tilde, const ScalarField& F, double s, const Window& w) {
  const ScalarField e = exp_nF(F);
  return window_integral(w, phi_tilde, [&](const ScalarField& slice) {
    double total = 0.0;
    for (std::size_t i = 0; i < slice.size(); ++i)
      if (-slice[i] - s > 0.0) total += e[i];
    return total * slice.grid.cell_volume();
  });
}

double energy_N(const SpaceTimeField& phi_tilde, const ScalarField& F, const Window& w, double N_exp) {
  if (!(N_exp > 0.0)) throw Error(ErrorKind::InvalidArgument, "energy exponent must be positive");
  const ScalarField e = exp_nF(F);
  return window_integral(w, phi_tilde, [&](const ScalarField& slice) {
    double total = 0.0;
    for (std::size_t i = 0; i < slice.size(); ++i)
      if (slice[i] < 0.0) total += std::pow(-slice[i], N_exp) * e[i];
    return total * slice.grid.cell_volume();
  });
}

double window_energy(const SpaceTimeField& phi_tilde, const ScalarField& F, const Window& w) {
  return energy_N(phi_tilde, F, w, 1.0);
}

double window_energy_signed(const SpaceTimeField& phi_tilde, const ScalarField& F, const Window& w) {
  const ScalarField e = exp_nF(F);
  return window_integral(w, phi_tilde, [&](const ScalarField& slice) { return -integrate(slice, e); });
}

std::vector<double> energy_window_starts(const std::vector<double>& times) {
  std::vector<double> starts;
  if (times.empty()) return starts;
  const double T = times.back();
  if (T < 1.0) return {times.front()};
  for (double t : times)
    if (t <= T - 1.0 + 1e-9) starts.push_back(t);
  return starts;
}

EnergySup energy_sup(const SpaceTimeField& phi_tilde, const ScalarField& F) {
  EnergySup out;
  for (double t0 : energy_window_starts(phi_tilde.times)) {
    const double e = window_energy(phi_tilde, F, make_window(phi_tilde.times, t0));
    if (e > out.E) out = {e, t0};
  }
  return out;
}

ScalarField green_representation(const ScalarField& phi) {
  const auto kernel = green_kernel(phi.grid);
  ScalarField minus_lap = laplacian(phi);
  for (auto& v : minus_lap.values) v = -v;
  // Periodic convolution via the spectral product.
  const auto& sp = phi.grid.spectral();
  auto a = sp.forward(kernel.shifted.values);
  const auto b = sp.forward(minus_lap.values);
  for (std::size_t c = 0; c < a.size(); ++c) a[c] *= b[c];
  ScalarField out = ScalarField::constant(phi.grid, 0.0);
  out.values = sp.inverse_unnormalized(a);
  const double scale = phi.grid.cell_volume() / static_cast<double>(phi.size());
  for (auto& v : out.values) v *= scale;
  return out;
}

Lemma23Result lemma23_checks(const FlowTrajectory& traj, const SourceData& src) {
  Lemma23Result r;
  const auto& grid = src.F.grid;
  const int n = grid.dim();
  r.K = src.K;
  r.C3 = n * green_kernel(grid).l1_norm;
  r.l1_bound = 2.0 * r.C3 * grid.volume();
  r.mean_rate_sup = -std::numeric_limits<double>::infinity();
  r.sup_tilde = -std::numeric_limits<double>::infinity();
  r.jensen_lhs = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < traj.phi.size(); ++j) {
    const auto& d = traj.diagnostics[j];
    r.mean_rate_sup = std::max(r.mean_rate_sup, d.mean_rate);
    r.sup_tilde = std::max(r.sup_tilde, d.sup_tilde);
    r.l1_tilde = std::max(r.l1_tilde, d.int_abs_tilde);
    const auto h = complex_hessian(traj.phi.slices[j]);
    ScalarField logdet = ScalarField::constant(grid, 0.0);
    ScalarField det = logdet;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      det[i] = h.matrices[i].det(n);
      logdet[i] = std::log(det[i]);
    }
    r.jensen_lhs = std::max(r.jensen_lhs, mean(logdet) - std::log(mean(det)));
  }
  return r;
}

double C4_from_C3(int n, double C3) { return (n + 1) * std::exp((C3 - 1.0) / (n + 1)); }

nlohmann::json ConstantsLedger::to_json() const {
  return {{"V", V},         {"Ent_p", Ent_p},   {"K", K},       {"C1", C1},     {"C2", C2},
          {"C3", C3},       {"C3_green", C3_green}, {"C4", C4}, {"C5", C5},     {"C6", nullptr},
          {"C7", C7},       {"alpha", alpha},   {"E", E},
          {"lemma31", {{"beta", beta31}, {"epsilon", eps31}, {"Lambda", Lambda31}, {"c", c31}}},
          {"lemma41", {{"beta", beta41}, {"epsilon", eps41}, {"Lambda", Lambda41}, {"b", b},
                       {"theta", theta}, {"r_inj", r_inj}}}};
}

}  // namespace mafl

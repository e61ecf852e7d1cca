#include "mafl/aux_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mafl {

double smooth_plus(double x, double k) {
  if (!(k >= 1.0)) throw Error(ErrorKind::InvalidArgument, "smoothing index must be >= 1");
  // Written to avoid cancellation for large negative x.
  const double r = std::hypot(x, 1.0 / k);
  return x >= 0.0 ? 0.5 * (x + r) : 0.5 / (k * k * (r - x));
}

ScalarField AuxWeight::at(double t) const {
  const auto& times = w.times;
  const double tol = 1e-12;
  if (times.empty() || t < times.front() - tol || t > times.back() + tol)
    return ScalarField::constant(w.grid, 0.0);
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.end()) return w.slices.back();
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  if (j == 0) return w.slices.front();
  const double a = (t - times[j - 1]) / (times[j] - times[j - 1]);
  ScalarField out = w.slices[j - 1];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - a) * out[i] + a * w.slices[j][i];
  return out;
}

nlohmann::json AuxWeight::params() const {
  nlohmann::json j = {{"kind", kind == WeightKind::LevelSet ? "level_set" : "entropy"},
                      {"t0", t0}, {"t1", t1}, {"A", A}};
  if (kind == WeightKind::LevelSet) {
    j["s"] = s;
    j["k"] = k;
    j["A_raw"] = A_raw;
  } else {
    j["p"] = p;
  }
  return j;
}

namespace {

ScalarField exp_nF_field(const ScalarField& F) {
  ScalarField e = F;
  const int n = F.grid.dim();
  for (auto& v : e.values) v = std::exp(n * v);
  return e;
}

void normalize(AuxWeight& aw, const ScalarField& e) {
  const Window win = make_window(aw.w.times, aw.t0);
  const double total = window_integral(win, aw.w, [&](const ScalarField& s) { return integrate(s, e); });
  aw.A = total;
  for (auto& slice : aw.w.slices)
    for (auto& v : slice.values) v /= total;
}

}  // namespace

AuxWeight build_level_weight(const SpaceTimeField& phi_tilde, const ScalarField& F, double s, double t0,
                             double k) {
  require_same_grid(phi_tilde.slices.front(), F);
  const Window win = make_window(phi_tilde.times, t0);
  const ScalarField e = exp_nF_field(F);
  AuxWeight aw(F.grid);
  aw.kind = WeightKind::LevelSet;
  aw.s = s;
  aw.t0 = win.t0;
  aw.t1 = win.t1;
  aw.k = k;
  aw.A_raw = window_integral(win, phi_tilde, [&](const ScalarField& slice) {
    double total = 0.0;
    for (std::size_t i = 0; i < slice.size(); ++i) total += std::max(0.0, -slice[i] - s) * e[i];
    return total * slice.grid.cell_volume();
  });
  if (aw.A_raw < kEmptySupport)
    throw Error(ErrorKind::EmptySupport, "super-level set at s=" + std::to_string(s) + ", t0=" +
                                             std::to_string(t0) + " is empty");
  for (std::size_t idx : win.indices) {
    ScalarField slice = phi_tilde.slices[idx];
    for (auto& v : slice.values) v = smooth_plus(-v - s, k);
    aw.w.push_back(phi_tilde.times[idx], std::move(slice));
  }
  normalize(aw, e);
  return aw;
}

AuxWeight build_entropy_weight(const std::vector<double>& times, const ScalarField& F, double p, double t0) {
  const Window win = make_window(times, t0);
  const ScalarField e = exp_nF_field(F);
  AuxWeight aw(F.grid);
  aw.kind = WeightKind::Entropy;
  aw.t0 = win.t0;
  aw.t1 = win.t1;
  aw.p = p;
  ScalarField base = F;
  for (auto& v : base.values) v = std::pow(std::abs(v), p) + 1.0;
  for (std::size_t idx : win.indices) aw.w.push_back(times[idx], base);
  normalize(aw, e);
  return aw;
}

AuxRate aux_rate(const ScalarField& psi, const ScalarField& weight, const ScalarField& exp_nF) {
  const int n = psi.grid.dim();
  const auto h = complex_hessian(psi);
  AuxRate out{ScalarField::constant(psi.grid, 0.0), 0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double lo = h.eigenvalues[i][0];
    out.min_eigen = std::min(out.min_eigen, lo);
    if (!(lo > 0.0))
      throw Error(ErrorKind::ConeViolation, "auxiliary metric lost positivity (min eigenvalue " +
                                                std::to_string(lo) + ")");
    const double det = h.matrices[i].det(n);
    out.rate[i] = -weight[i] * exp_nF[i] / det;
    out.stiffness = std::max(out.stiffness, kDdbarScale * (-out.rate[i]) / lo);
  }
  require_finite(out.rate, "auxiliary rate");
  return out;
}

namespace {

AuxCheckpoint record(const ScalarField& psi, double t, const AuxWeight& weight, const ScalarField& e) {
  const ScalarField w = weight.at(t);
  const AuxRate r = aux_rate(psi, w, e);
  AuxCheckpoint c;
  c.time = t;
  c.sup_psi = psi.max();
  c.I = I_functional(psi);
  c.int_psi = integrate(psi);
  c.dI_dt = I_functional_rate(psi, r.rate);
  c.dI_dt_expected = -integrate(w, e);
  c.max_rate = r.rate.max();
  c.min_eigen = r.min_eigen;
  return c;
}

}  // namespace

AuxTrajectory run_aux(const AuxWeight& weight, const ScalarField& F, const AuxOptions& options) {
  const ScalarField e = exp_nF_field(F);
  const auto& grid = F.grid;
  AuxTrajectory traj(grid);
  ScalarField psi = ScalarField::constant(grid, 0.0);
  double t = weight.t0;
  traj.psi.push_back(t, psi);
  traj.checkpoints.push_back(record(psi, t, weight, e));

  auto rate = [&](const ScalarField& u, double time) {
    ++traj.rate_evaluations;
    return aux_rate(u, weight.at(time), e).rate;
  };
  AuxRate current = aux_rate(psi, weight.at(t), e);
  traj.max_rate_all_steps = current.rate.max();
  for (std::size_t j = 1; j < weight.w.size(); ++j) {
    const double target = weight.w.times[j];
    while (t < target) {
      const double radius = spectral_radius(grid, current.stiffness);
      const double s_max = options.max_stages;
      const double dt_stable = 0.653 * (s_max * s_max - 1.0) / (1.2 * std::max(radius, 1e-300));
      double dt = std::min({options.dt_max, dt_stable, target - t});
      for (int attempt = 0;; ++attempt) {
        try {
          const int stages = std::min(options.max_stages, rkc_stages(dt, radius));
          ScalarField next = rkc2(psi, t, dt, stages, rate, current.rate);
          double t_next = t + dt;
          if (target - t_next <= 1e-12 * std::max(1.0, target)) t_next = target;
          AuxRate next_rate = aux_rate(next, weight.at(t_next), e);
          psi = std::move(next);
          t = t_next;
          current = std::move(next_rate);
          traj.max_rate_all_steps = std::max(traj.max_rate_all_steps, current.rate.max());
          ++traj.steps;
          break;
        } catch (const Error& err) {
          if (err.kind() != ErrorKind::ConeViolation && err.kind() != ErrorKind::NonFinite) throw;
          ++traj.rejections;
          dt *= 0.5;
          if (dt < kDtFloor || attempt + 1 >= kMaxHalvings)
            throw Error(ErrorKind::DtUnderflow,
                        "auxiliary time step underflow at t=" + std::to_string(t) + " (" + err.what() + ")");
        }
      }
    }
    traj.psi.push_back(t, psi);
    traj.checkpoints.push_back(record(psi, t, weight, e));
  }
  return traj;
}

Lemma21Result lemma21_check(const AuxWeight& weight, const AuxTrajectory& aux, const ScalarField& F) {
  const ScalarField e = exp_nF_field(F);
  Lemma21Result r;
  const Window win = make_window(weight.w.times, weight.t0);
  r.C1 = window_integral(win, weight.w, [&](const ScalarField& s) { return integrate(s, e); });
  r.bound = r.C1 / F.grid.volume();
  for (const auto& c : aux.checkpoints) r.sup_abs_psi = std::max(r.sup_abs_psi, std::abs(c.sup_psi));
  return r;
}

}  // namespace mafl

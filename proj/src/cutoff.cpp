#include "mafl/cutoff.hpp"

#include <algorithm>
#include <cmath>

#include "mafl/error.hpp"

namespace mafl {

double quintic_ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double torus_distance(const std::array<double, 4>& a, const std::array<double, 4>& b, int axes) {
  double d2 = 0.0;
  for (int k = 0; k < axes; ++k) {
    double d = std::abs(a[k] - b[k]);
    d -= std::floor(d);
    d = std::min(d, 1.0 - d);
    d2 += d * d;
  }
  return std::sqrt(d2);
}

nlohmann::json CutoffResult::to_json() const {
  return {{"theta", theta},       {"r", r},           {"grad_ratio", grad_ratio}, {"hess_ratio", hess_ratio},
          {"eta_min", eta_min},   {"eta_max", eta_max}, {"grad_ok", grad_ok},     {"hess_ok", hess_ok},
          {"range_ok", range_ok}};
}

CutoffResult build_cutoff(const TorusGrid& grid, std::size_t center, const KeyConstants41& k, double M_val) {
  if (center >= grid.size()) throw Error(ErrorKind::InvalidArgument, "cut-off center outside the grid");
  CutoffResult out;
  out.r = k.r_inj;
  out.theta = cutoff_theta(k, M_val);
  if (0.25 * out.r < 4.0 * grid.spacing())
    throw Error(ErrorKind::Unresolved, "cut-off ramp spans fewer than four grid cells");

  const auto x0 = grid.coords(center);
  const int axes = grid.real_axes();
  const double r = out.r, theta = out.theta;
  out.eta = ScalarField::from_function(grid, [&](const std::array<double, 4>& x) {
    const double d = torus_distance(x, x0, axes);
    return 1.0 - theta * quintic_ramp((d - 0.5 * r) / (0.25 * r));
  });
  out.eta_min = out.eta.min();
  out.eta_max = out.eta.max();

  const auto grad = gradient(out.eta);
  const auto hess = complex_hessian_raw(out.eta);
  const int n = grid.dim();
  double g2 = 0.0, hn = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = 0.0;
    for (const auto& g : grad) s += g[i] * g[i];
    g2 = std::max(g2, 0.25 * s);
    const auto ev = hermitian_eigenvalues(hess.matrices[i], n);
    hn = std::max({hn, std::abs(ev[0]), std::abs(ev[n - 1])});
  }
  out.grad_ratio = g2 * r * r / (theta * theta);
  out.hess_ratio = hn * r * r / theta;
  out.grad_ok = out.grad_ratio <= 10.0;
  out.hess_ok = out.hess_ratio <= 10.0;
  out.range_ok = out.eta_min >= 0.9 && out.eta_max <= 1.0 + 1e-12;
  return out;
}

}  // namespace mafl

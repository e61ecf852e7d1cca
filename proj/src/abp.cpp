#include "mafl/abp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mafl/error.hpp"

namespace mafl {

namespace {

// Cyclic Jacobi eigenvalues of a small symmetric matrix (row-major, size m).
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int m) {
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < m; ++p)
      for (int q = p + 1; q < m; ++q) off += a[p * m + q] * a[p * m + q];
    if (off < 1e-30) break;
    for (int p = 0; p < m; ++p) {
      for (int q = p + 1; q < m; ++q) {
        const double apq = a[p * m + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < m; ++k) {
          const double akp = a[k * m + p], akq = a[k * m + q];
          a[k * m + p] = c * akp - s * akq;
          a[k * m + q] = s * akp + c * akq;
        }
        for (int k = 0; k < m; ++k) {
          const double apk = a[p * m + k], aqk = a[q * m + k];
          a[p * m + k] = c * apk - s * aqk;
          a[q * m + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(m);
  for (int k = 0; k < m; ++k) ev[k] = a[k * m + k];
  return ev;
}

double unit_ball_volume(int m) { return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0); }

}  // namespace

void Patch::validate_shape() const {
  if (m != 2 && m != 4) throw Error(ErrorKind::UnsupportedDimension, "patch dimension m must be 2 or 4");
  if (points < 4 || time_points < 4)
    throw Error(ErrorKind::PatchTooSmall, "patch needs at least 4 points per axis");
  if (!(half_width > 0.0) || !(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "patch extents must be positive");
}

std::size_t Patch::spatial_size() const {
  std::size_t S = 1;
  for (int k = 0; k < m; ++k) S *= static_cast<std::size_t>(points);
  return S;
}

double Patch::diameter() const { return ball ? 2.0 * half_width : 2.0 * half_width * std::sqrt(m); }

std::vector<double> Patch::coords(std::size_t index) const {
  std::vector<double> x(m);
  for (int k = m - 1; k >= 0; --k) {
    x[k] = -half_width + static_cast<double>(index % points) * spacing();
    index /= points;
  }
  return x;
}

Patch Patch::from_json(const nlohmann::json& j) {
  static const std::vector<std::string> allowed{"m", "points", "time_points", "half_width",
                                                "T", "domain", "values", "example"};
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorKind::Schema, "unknown patch key '" + key + "'");
  try {
    const int m = j.value("m", 2);
    const int P = j.value("points", 33);
    const int Q = j.value("time_points", 33);
    const double L = j.value("half_width", 1.0);
    const double T = j.value("T", 1.0);
    const std::string domain = j.value("domain", "ball");
    if (domain != "ball" && domain != "box") throw Error(ErrorKind::Schema, "domain must be 'ball' or 'box'");
    const bool ball = domain == "ball";
    if (j.contains("values")) {
      Patch p{m, P, Q, L, T, ball, j.at("values").get<std::vector<double>>()};
      p.validate_shape();
      if (p.values.size() != p.spatial_size() * static_cast<std::size_t>(Q))
        throw Error(ErrorKind::Schema, "patch values have the wrong length");
      return p;
    }
    const std::string example = j.at("example").get<std::string>();
    if (example == "quadratic")
      return sample(m, P, Q, L, T, ball, [](const std::vector<double>& x, double t) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return t * (1.0 - r2);
      });
    if (example == "decreasing")
      return sample(m, P, Q, L, T, ball, [](const std::vector<double>&, double t) { return -t; });
    throw Error(ErrorKind::Schema, "unknown patch example '" + example + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("patch file: ") + e.what());
  }
}

double abp_default_constant(int m) { return std::pow(std::pow(2.0, m) / unit_ball_volume(m), 1.0 / (m + 1.0)); }

nlohmann::json AbpResult::to_json() const {
  return {{"sup_D", sup_D},
          {"sup_boundary", sup_boundary},
          {"lhs", lhs},
          {"integral", integral},
          {"rhs_without_C", rhs_without_C},
          {"C_dim", C_dim},
          {"rhs", rhs},
          {"ratio", ratio},
          {"contact_fraction", contact_fraction},
          {"pass", pass}};
}

AbpResult abp_check(const Patch& patch, double C_dim) {
  patch.validate_shape();
  const int m = patch.m;
  const int P = patch.points;
  const std::size_t S = patch.spatial_size();
  if (patch.values.size() != S * static_cast<std::size_t>(patch.time_points))
    throw Error(ErrorKind::InvalidArgument, "patch values have the wrong length");
  for (double v : patch.values)
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "patch values must be finite");

  const double h = patch.spacing();
  const double dt = patch.dt();
  std::vector<std::size_t> stride(m);
  {
    std::size_t st = 1;
    for (int k = m - 1; k >= 0; --k) stride[k] = st, st *= P;
  }

  // Domain membership; interior = every point of the 3^m stencil is in the domain.
  std::vector<char> in(S), interior(S, 0);
  const double tol = 1e-12 * patch.half_width;
  for (std::size_t i = 0; i < S; ++i) {
    if (!patch.ball) {
      in[i] = 1;
      continue;
    }
    double r2 = 0.0;
    for (double v : patch.coords(i)) r2 += v * v;
    in[i] = std::sqrt(r2) <= patch.half_width + tol;
  }
  for (std::size_t i = 0; i < S; ++i) {
    if (!in[i]) continue;
    bool ok = true;
    std::size_t rem = i;
    for (int k = m - 1; k >= 0 && ok; --k) {
      const int c = static_cast<int>(rem % P);
      rem /= P;
      ok = c > 0 && c < P - 1;
    }
    for (int code = 0; ok && code < static_cast<int>(std::pow(3, m)); ++code) {
      long offset = 0;
      int cc = code;
      for (int k = 0; k < m; ++k, cc /= 3) offset += static_cast<long>(cc % 3 - 1) * static_cast<long>(stride[k]);
      ok = in[static_cast<std::size_t>(static_cast<long>(i) + offset)];
    }
    interior[i] = ok;
  }

  AbpResult out;
  out.C_dim = C_dim;
  out.sup_D = -std::numeric_limits<double>::infinity();
  out.sup_boundary = -std::numeric_limits<double>::infinity();
  std::size_t contact = 0, candidates = 0;
  std::vector<double> hess(static_cast<std::size_t>(m * m));
  for (int q = 0; q < patch.time_points; ++q) {
    const double* u = patch.values.data() + static_cast<std::size_t>(q) * S;
    for (std::size_t i = 0; i < S; ++i) {
      if (!in[i]) continue;
      out.sup_D = std::max(out.sup_D, u[i]);
      if (q == 0 || !interior[i]) {
        out.sup_boundary = std::max(out.sup_boundary, u[i]);
        continue;
      }
      ++candidates;
      const double ut = (u[i] - u[i - S]) / dt;
      if (ut < 0.0) continue;
      for (int a = 0; a < m; ++a) {
        const std::size_t sa = stride[a];
        hess[a * m + a] = (u[i + sa] - 2.0 * u[i] + u[i - sa]) / (h * h);
        for (int b = a + 1; b < m; ++b) {
          const std::size_t sb = stride[b];
          const double mixed = (u[i + sa + sb] - u[i + sa - sb] - u[i - sa + sb] + u[i - sa - sb]) / (4.0 * h * h);
          hess[a * m + b] = hess[b * m + a] = mixed;
        }
      }
      const auto ev = symmetric_eigenvalues(hess, m);
      double scale = 0.0, det = 1.0;
      for (double e : ev) scale = std::max(scale, std::abs(e)), det *= e;
      if (*std::max_element(ev.begin(), ev.end()) > 1e-10 * std::max(1.0, scale)) continue;
      ++contact;
      out.integral += std::abs(ut * det) * std::pow(h, m) * dt;
    }
  }
  out.lhs = out.sup_D - out.sup_boundary;
  out.contact_fraction = candidates ? static_cast<double>(contact) / candidates : 0.0;
  out.rhs_without_C = std::pow(patch.diameter(), m / (m + 1.0)) * std::pow(out.integral, 1.0 / (m + 1.0));
  out.rhs = C_dim * out.rhs_without_C;
  out.ratio = out.rhs_without_C > 0.0 ? out.lhs / out.rhs_without_C : 0.0;
  out.pass = out.lhs <= out.rhs;
  return out;
}

}  // namespace mafl

#pragma once

// Discrete parabolic Aleksandrov-Bakelman-Pucci estimate on a space-time patch.

#include <string>
#include <vector>

#include "json.hpp"

namespace mafl {

/// u sampled on [-L, L]^m x [0, T] with `points` nodes per spatial axis and
/// `time_points` nodes in time; values indexed [q][x_1]...[x_m], last axis fastest.
/// The spatial domain is the ball |x| <= L or the whole box.
struct Patch {
  int m = 2;
  int points = 33;
  int time_points = 33;
  double half_width = 1.0;
  double T = 1.0;
  bool ball = true;
  std::vector<double> values;

  std::size_t spatial_size() const;
  double spacing() const { return 2.0 * half_width / (points - 1); }
  double dt() const { return T / (time_points - 1); }
  double diameter() const;
  /// Spatial coordinates of a flat spatial index.
  std::vector<double> coords(std::size_t index) const;

  template <class Fn>
  static Patch sample(int m, int points, int time_points, double half_width, double T, bool ball, Fn&& u) {
    Patch p{m, points, time_points, half_width, T, ball, {}};
    p.validate_shape();
    const std::size_t S = p.spatial_size();
    p.values.resize(S * static_cast<std::size_t>(time_points));
    for (int q = 0; q < time_points; ++q)
      for (std::size_t i = 0; i < S; ++i) p.values[q * S + i] = u(p.coords(i), q * p.dt());
    return p;
  }

  /// {"m", "points", "time_points", "half_width", "T", "domain": "ball"|"box", "values" | "example"},
  /// where "example" is "quadratic" (t (1 - |x|^2)) or "decreasing" (-t).
  static Patch from_json(const nlohmann::json& j);
  void validate_shape() const;
};

/// (2^m / |B_1^m|)^{1/(m+1)}, frozen after calibration on the quadratic example.
double abp_default_constant(int m);

struct AbpResult {
  double sup_D = 0.0;
  double sup_boundary = 0.0;
  double lhs = 0.0;            // sup_D u - sup over the parabolic boundary
  double integral = 0.0;       // int_Gamma |u_t det D^2 u|
  double rhs_without_C = 0.0;  // diam^{m/(m+1)} integral^{1/(m+1)}
  double C_dim = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs_without_C (0 when the integral vanishes and lhs <= 0)
  double contact_fraction = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Contact set Gamma = {u_t >= 0, D^2_x u negative semi-definite}; backward
/// differences in time, central differences in space.
AbpResult abp_check(const Patch& patch, double C_dim);

}  // namespace mafl

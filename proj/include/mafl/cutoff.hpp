#pragma once

// Radial cut-off eta around a grid point: 1 on B(x0, r/2), 1 - theta outside B(x0, 3r/4).

#include "json.hpp"
#include "mafl/estimates.hpp"
#include "mafl/torus.hpp"

namespace mafl {

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clamped to [0, 1].
double quintic_ramp(double t);

/// Flat quotient distance on the unit torus.
double torus_distance(const std::array<double, 4>& a, const std::array<double, 4>& b, int axes);

struct CutoffResult {
  ScalarField eta;
  double theta = 0.0;
  double r = 0.0;
  /// max |d eta|^2 r^2 / theta^2, with |d eta|^2 = 1/4 |grad eta|^2.
  double grad_ratio = 0.0;
  /// max operator norm of d dbar eta, times r^2 / theta.
  double hess_ratio = 0.0;
  double eta_min = 0.0;
  double eta_max = 0.0;
  bool grad_ok = false;
  bool hess_ok = false;
  bool range_ok = false;

  nlohmann::json to_json() const;
};

/// Throws Unresolved when the ramp width r/4 spans fewer than four grid cells.
CutoffResult build_cutoff(const TorusGrid& grid, std::size_t center, const KeyConstants41& k, double M_val);

}  // namespace mafl

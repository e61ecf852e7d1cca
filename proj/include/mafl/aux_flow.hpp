#pragma once

// Inverse Monge-Ampere flows  (-psi_dot) omega_psi^n = w e^{nF} omega_0^n
// driven by a normalized space-time weight w on a window [t0, t1].

#include <string>
#include <vector>

#include "json.hpp"
#include "mafl/flow.hpp"
#include "mafl/functionals.hpp"

namespace mafl {

/// 1/2 (x + sqrt(x^2 + 1/k^2)): a smooth, increasing upper approximation of x_+.
double smooth_plus(double x, double k);

enum class WeightKind { LevelSet, Entropy };

/// Weight slices at the window's checkpoint times, linear in time between them,
/// normalized so that int int w e^{nF} = 1 over the window.
struct AuxWeight {
  WeightKind kind = WeightKind::LevelSet;
  double s = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  double k = 100.0;
  double p = 0.0;
  /// Normalization actually used (smoothed for level sets).
  double A = 0.0;
  /// Level sets only: int int (-phi_tilde - s)_+ e^{nF} without smoothing.
  double A_raw = 0.0;
  SpaceTimeField w;

  explicit AuxWeight(const TorusGrid& g) : w(g) {}
  /// Linear interpolation in time; zero outside [t0, t1].
  ScalarField at(double t) const;
  nlohmann::json params() const;
};

/// Raw level-set normalizations below this count as an empty super-level set.
inline constexpr double kEmptySupport = 1e-14;

/// Throws EmptySupport when the super-level set {-phi_tilde > s} is empty on the window.
AuxWeight build_level_weight(const SpaceTimeField& phi_tilde, const ScalarField& F, double s, double t0,
                             double k);
/// Weight proportional to |F|^p + 1 on the window.
AuxWeight build_entropy_weight(const std::vector<double>& times, const ScalarField& F, double p, double t0);

struct AuxCheckpoint {
  double time = 0.0;
  double sup_psi = 0.0;
  double I = 0.0;
  double int_psi = 0.0;
  /// dI/dt by the product rule.
  double dI_dt = 0.0;
  /// - int w e^{nF}, which dI/dt should equal.
  double dI_dt_expected = 0.0;
  double max_rate = 0.0;
  double min_eigen = 0.0;
};

struct AuxTrajectory {
  explicit AuxTrajectory(const TorusGrid& g) : psi(g) {}
  SpaceTimeField psi;
  std::vector<AuxCheckpoint> checkpoints;
  /// Largest psi_dot seen at any accepted step.
  double max_rate_all_steps = -std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
  std::size_t rejections = 0;
  std::size_t rate_evaluations = 0;
};

struct AuxRate {
  ScalarField rate;
  double stiffness = 0.0;
  double min_eigen = 0.0;
};

/// psi_dot = - w(t) e^{nF} / det h_psi.
AuxRate aux_rate(const ScalarField& psi, const ScalarField& weight, const ScalarField& exp_nF);

struct AuxOptions {
  /// Accuracy cap on the step; the stage count handles stability.
  double dt_max = 1.0 / 200.0;
  int max_stages = 256;
};

/// Integrates from psi(t0) = 0 to t1 with second-order Runge-Kutta-Chebyshev
/// steps, recording every weight time. The flow is very stiff where the weight
/// nearly vanishes, which rules out the three-stage scheme of the main flow.
AuxTrajectory run_aux(const AuxWeight& weight, const ScalarField& F, const AuxOptions& options = {});

struct Lemma21Result {
  double sup_abs_psi = 0.0;
  double bound = 0.0;  // C1 / V
  double C1 = 0.0;
};

/// |sup psi| <= C1 / V where C1 = int int w e^{nF}; follows from I decreasing
/// by exactly C1 and int psi >= I(psi).
Lemma21Result lemma21_check(const AuxWeight& weight, const AuxTrajectory& aux, const ScalarField& F);

}  // namespace mafl

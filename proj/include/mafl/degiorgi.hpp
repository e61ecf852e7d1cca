#pragma once

// De Giorgi iteration on sampled level-mass functions.

#include <optional>
#include <vector>

#include "json.hpp"

namespace mafl {

struct DeGiorgiInput {
  /// Strictly increasing levels s >= 0 and the sampled mass Phi(s), non-increasing.
  std::vector<double> s;
  std::vector<double> Phi;
  double B0 = 1.0;
  double delta0 = 1.0;
  /// Hypothesis r Phi(s + r) <= B0 Phi(s)^{1 + delta0} is required for r in (0, r_max].
  double r_max = 1.0;
  /// When set, s0 comes from the Chebyshev bound (2 B0)^{1/delta0} E.
  std::optional<double> E;
};

struct HypothesisViolation {
  double s = 0.0;
  double r = 0.0;
  double lhs = 0.0;  // r Phi(s + r)
  double rhs = 0.0;  // B0 Phi(s)^{1 + delta0}
};

struct DeGiorgiResult {
  std::optional<HypothesisViolation> violation;
  double s0 = 0.0;
  std::vector<double> sequence;  // s_0, s_1, ..., ending where Phi vanishes
  double S_infinity = 0.0;
  double Phi_at_S_infinity = 0.0;
  double spacing = 0.0;  // largest gap between consecutive samples
  /// s0 + 1/(1 - 2^{-delta0}) + spacing
  double bound = 0.0;
  bool vanishes = false;
  bool within_bound = false;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Throws InvalidArgument for malformed samples and Infeasible when the samples
/// end before s0 or before Phi halves. A failed hypothesis scan is reported
/// through `violation` rather than thrown.
DeGiorgiResult degiorgi_s_infinity(const DeGiorgiInput& input);

/// First sampled pair (s, r) breaking the hypothesis, scanning s then r.
std::optional<HypothesisViolation> degiorgi_hypothesis_scan(const DeGiorgiInput& input);

/// Smallest B0 for which the sampled hypothesis holds.
double degiorgi_minimal_B0(const std::vector<double>& s, const std::vector<double>& Phi, double delta0,
                           double r_max);

}  // namespace mafl

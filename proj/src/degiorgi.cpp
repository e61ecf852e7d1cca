#include "mafl/degiorgi.hpp"

#include <algorithm>
#include <cmath>

#include "mafl/error.hpp"

namespace mafl {

namespace {

void validate(const DeGiorgiInput& in) {
  if (in.s.size() < 2 || in.s.size() != in.Phi.size())
    throw Error(ErrorKind::InvalidArgument, "need at least two (s, Phi) samples of equal length");
  if (!(in.B0 > 0.0) || !(in.delta0 > 0.0) || !(in.r_max > 0.0))
    throw Error(ErrorKind::InvalidArgument, "B0, delta0 and r_max must be positive");
  for (std::size_t i = 0; i < in.s.size(); ++i) {
    if (!std::isfinite(in.s[i]) || !std::isfinite(in.Phi[i]) || in.s[i] < 0.0 || in.Phi[i] < 0.0)
      throw Error(ErrorKind::InvalidArgument, "samples must be finite and non-negative");
    if (i > 0 && !(in.s[i] > in.s[i - 1])) throw Error(ErrorKind::InvalidArgument, "levels must increase");
    if (i > 0 && in.Phi[i] > in.Phi[i - 1]) throw Error(ErrorKind::InvalidArgument, "Phi must be non-increasing");
  }
  if (in.E && !(*in.E >= 0.0)) throw Error(ErrorKind::InvalidArgument, "E must be non-negative");
}

// Relative slack so that equality cases survive rounding.
bool exceeds(double lhs, double rhs) { return lhs > rhs * (1.0 + 1e-12) + 1e-300; }

}  // namespace

nlohmann::json DeGiorgiResult::to_json() const {
  nlohmann::json j{{"s0", s0},         {"sequence", sequence},         {"S_infinity", S_infinity},
                   {"Phi_at_S_infinity", Phi_at_S_infinity},           {"spacing", spacing},
                   {"bound", bound},   {"vanishes", vanishes},         {"within_bound", within_bound},
                   {"pass", pass},     {"violation", nullptr}};
  if (violation)
    j["violation"] = {{"s", violation->s}, {"r", violation->r}, {"lhs", violation->lhs}, {"rhs", violation->rhs}};
  return j;
}

std::optional<HypothesisViolation> degiorgi_hypothesis_scan(const DeGiorgiInput& in) {
  validate(in);
  const std::size_t m = in.s.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double rhs = in.B0 * std::pow(in.Phi[i], 1.0 + in.delta0);
    for (std::size_t j = i + 1; j < m; ++j) {
      const double r = in.s[j] - in.s[i];
      if (r > in.r_max) break;
      const double lhs = r * in.Phi[j];
      if (exceeds(lhs, rhs)) return HypothesisViolation{in.s[i], r, lhs, rhs};
    }
  }
  return std::nullopt;
}

double degiorgi_minimal_B0(const std::vector<double>& s, const std::vector<double>& Phi, double delta0,
                           double r_max) {
  double B0 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size() && s[j] - s[i] <= r_max; ++j) {
      const double lhs = (s[j] - s[i]) * Phi[j];
      if (lhs == 0.0) break;
      B0 = std::max(B0, lhs / std::pow(Phi[i], 1.0 + delta0));
    }
  }
  return B0;
}

DeGiorgiResult degiorgi_s_infinity(const DeGiorgiInput& in) {
  DeGiorgiResult out;
  out.violation = degiorgi_hypothesis_scan(in);
  const std::size_t m = in.s.size();
  for (std::size_t i = 1; i < m; ++i) out.spacing = std::max(out.spacing, in.s[i] - in.s[i - 1]);
  if (out.violation) return out;

  std::size_t k = 0;
  if (in.E) {
    const double target = std::pow(2.0 * in.B0, 1.0 / in.delta0) * *in.E;
    while (k < m && in.s[k] < target) ++k;
  } else {
    const double threshold = 1.0 / (2.0 * in.B0);
    while (k < m && !(std::pow(in.Phi[k], in.delta0) < threshold)) ++k;
  }
  if (k == m) throw Error(ErrorKind::Infeasible, "samples end before a valid s0");

  out.s0 = in.s[k];
  out.sequence.push_back(out.s0);
  while (in.Phi[k] > 0.0) {
    const double half = 0.5 * in.Phi[k];
    std::size_t next = k + 1;
    while (next < m && in.Phi[next] > half) ++next;
    if (next == m) throw Error(ErrorKind::Infeasible, "samples end before Phi halves");
    k = next;
    out.sequence.push_back(in.s[k]);
  }
  out.S_infinity = in.s[k];
  out.Phi_at_S_infinity = in.Phi[k];
  out.bound = out.s0 + 1.0 / (1.0 - std::pow(2.0, -in.delta0)) + out.spacing;
  out.vanishes = out.Phi_at_S_infinity == 0.0;
  out.within_bound = out.S_infinity <= out.bound;
  out.pass = out.vanishes && out.within_bound;
  return out;
}

}  // namespace mafl

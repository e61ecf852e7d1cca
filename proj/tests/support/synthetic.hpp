#pragma once

// Randomized level-mass profiles Phi(s) = a (1 - s/L)_+^q with a hypothesis-consistent B0.

#include <cmath>
#include <random>

#include "mafl/degiorgi.hpp"

namespace mafl::testing {

inline DeGiorgiInput synthetic_degiorgi(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double L = 0.5 + 1.5 * U(rng);
  const double q = 1.0 + 2.0 * U(rng);
  const double a = 0.05 + 0.95 * U(rng);
  const int samples = 100 + static_cast<int>(300 * U(rng));
  DeGiorgiInput in;
  in.delta0 = (0.5 + 0.5 * U(rng)) / q;
  in.r_max = 2.0 * L;
  const double h = 1.5 * L / samples;
  for (int i = 0; i <= samples; ++i) {
    const double s = i * h;
    in.s.push_back(s);
    in.Phi.push_back(a * std::pow(std::max(0.0, 1.0 - s / L), q));
  }
  in.B0 = degiorgi_minimal_B0(in.s, in.Phi, in.delta0, in.r_max) * (1.0 + U(rng));
  return in;
}

/// Sequential scan: walk the samples once, stepping the level whenever Phi halves.
struct ScanResult {
  std::vector<double> sequence;
  bool complete = false;
};

inline ScanResult sequential_scan(const DeGiorgiInput& in) {
  ScanResult out;
  double current = -1.0;
  for (std::size_t i = 0; i < in.s.size(); ++i) {
    if (current < 0.0) {
      if (std::pow(in.Phi[i], in.delta0) * 2.0 * in.B0 < 1.0) {
        current = in.Phi[i];
        out.sequence.push_back(in.s[i]);
      }
    } else if (current > 0.0 && 2.0 * in.Phi[i] <= current) {
      current = in.Phi[i];
      out.sequence.push_back(in.s[i]);
    }
    if (current == 0.0) {
      out.complete = true;
      break;
    }
  }
  return out;
}

}  // namespace mafl::testing

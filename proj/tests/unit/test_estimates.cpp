#include <cmath>
#include <functional>
#include <numbers>

#include "doctest.h"
#include "mafl/error.hpp"
#include "mafl/estimates.hpp"

using namespace mafl;
using std::numbers::pi;

namespace {
// Golden-section minimization on [a, b] for unimodal g.
double golden_min(const std::function<double(double)>& g, double a, double b) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (g(c) < g(d)) b = d;
    else a = c;
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return 0.5 * (a + b);
}

SpaceTimeField constant_stack(const TorusGrid& g, const std::vector<double>& times, double value) {
  SpaceTimeField f(g);
  for (double t : times) f.push_back(t, ScalarField::constant(g, value));
  return f;
}
}  // namespace

TEST_CASE("level-set constants solve their defining relations") {
  CHECK(constants31(1, 1.0, 2.0).beta == doctest::Approx(2.0 / 3.0));
  for (int n : {1, 2}) {
    for (double A : {1e-3, 1.0, 1e3}) {
      const auto k = constants31(n, A, C4_from_C3(n, 0.22));
      for (double r : k.residuals) CHECK(r < 1e-10);
      CHECK(k.epsilon > 0.0);
      CHECK(k.Lambda > 0.0);
      CHECK(k.c > 0.0);
    }
  }
  CHECK_THROWS_AS(constants31(1, 0.0, 2.0), Error);
  CHECK_THROWS_AS(constants31(3, 1.0, 2.0), Error);
}

TEST_CASE("level-set test function on trivial data") {
  auto g = make_grid(1, 8);
  const std::vector<double> times{0.0, 0.5, 1.0};
  auto phi = constant_stack(g, times, 0.0);
  auto psi = constant_stack(g, times, 0.0);
  const auto k = constants31(1, 0.5, 2.0);
  const double s = 0.3;
  auto r = check_lemma31(psi, phi, s, k);
  CHECK(r.max_H == doctest::Approx(-k.epsilon * std::pow(k.Lambda, k.beta) - s));
  CHECK(r.pass);
  CHECK(r.tolerance == doctest::Approx(1e-4));

  // Above the top level H is bounded by -eps (-psi + Lambda)^beta.
  auto deep = constant_stack(g, times, -1.0);
  auto psi_neg = constant_stack(g, times, -0.7);
  auto r2 = check_lemma31(psi_neg, deep, 1.0, k);
  CHECK(r2.max_H < 0.0);
  CHECK(r2.max_H_initial == r2.max_H_interior);

  auto shifted = constant_stack(g, {0.0, 0.25}, 0.0);
  CHECK_THROWS_AS(check_lemma31(psi, shifted, s, k), Error);
}

TEST_CASE("exponential bound") {
  auto g = make_grid(1, 8);
  const std::vector<double> times{0.0, 0.5, 1.0};
  const auto k = constants31(1, 0.5, 2.0);
  auto zero = constant_stack(g, times, 0.0);
  auto empty = check_exp_bound(zero, zero, 0.1, k, 0.5);
  CHECK(empty.lhs == 0.0);
  CHECK(empty.rhs == 0.0);
  CHECK(empty.pass);

  // H <= 0 point-wise implies the exponential bound.
  auto phi = constant_stack(g, times, -0.4);
  auto psi = constant_stack(g, times, -0.2);
  const double s = 0.1;
  REQUIRE(check_lemma31(psi, phi, s, k).max_H <= 0.0);
  auto r = check_exp_bound(psi, phi, s, k, 0.5);
  CHECK(r.lambda == doctest::Approx(0.5 / k.c));
  CHECK(r.lhs > 0.0);
  CHECK(r.pass);
  const double x = (0.4 - s) / std::pow(k.A, 1.0 / 3.0);
  CHECK(r.lhs == doctest::Approx(std::exp(r.lambda * std::pow(x, 1.5))));
  CHECK(r.rhs == doctest::Approx(std::exp(0.5 * (0.2 + k.Lambda))));
}

TEST_CASE("iteration inequality on a constant field") {
  CHECK(delta0_printed(1, 4.0) == 1.25);
  CHECK(hoelder_exponent(1, 4.0) == doctest::Approx(1.25));
  auto g = make_grid(1, 8);
  auto phi = constant_stack(g, {0.0, 0.5, 1.0}, -2.0);
  auto F = ScalarField::constant(g, 0.0);
  auto r = check_iteration(phi, F, 0.0, 4.0, 3);
  CHECK(r.lower_pass);
  CHECK_FALSE(r.vacuous);
  // s = 1 (second level), r = 1/2: A = 1, r phi(1.5) = 0.5.
  bool found = false;
  for (const auto& row : r.rows) {
    if (row.s == 1.0 && row.r == 0.5) {
      found = true;
      CHECK(row.A_s == doctest::Approx(1.0));
      CHECK(row.r_phi_s_plus_r == doctest::Approx(0.5));
    }
    CHECK(row.A_s >= row.r_phi_s_plus_r);
  }
  CHECK(found);
  CHECK(std::isfinite(r.B0_measured));
  CHECK(r.B0_measured == doctest::Approx(2.0));
  CHECK(r.B0_predicted >= r.B0_measured_hoelder * (1 - 1e-12));

  auto flat = constant_stack(g, {0.0, 1.0}, 0.0);
  CHECK(check_iteration(flat, F, 0.0, 4.0).vacuous);
  CHECK_THROWS_AS(check_iteration(flat, F, 0.0, 2.0), Error);
}

TEST_CASE("young inequality") {
  CHECK(young_constant_default(4.0) == doctest::Approx(16.0 * std::exp(-2.0) + 1.0));
  auto g = make_grid(1, 8);
  auto phi = constant_stack(g, {0.0, 0.5, 1.0}, -1.0);
  auto F = ScalarField::constant(g, 0.0);
  auto w = make_window(phi.times, 0.0);
  const double Cp = young_constant_default(4.0);

  auto zero_v = constant_stack(g, phi.times, 0.0);
  auto r0 = check_young(zero_v, phi, F, 0.5, w, 4.0, Cp);
  CHECK(r0.lhs == 0.0);
  CHECK(r0.pass);

  auto one = constant_stack(g, phi.times, 1.0);
  auto r1 = check_young(one, phi, F, 0.5, w, 4.0, Cp);
  CHECK(r1.lhs == doctest::Approx(1.0));
  CHECK(r1.rhs == doctest::Approx(Cp * std::exp(2.0)));
  CHECK(r1.pass);

  auto v = young_test_function(phi, 0.5, w, 1.0, 2.0);
  CHECK(v.slices[0][0] == doctest::Approx(std::pow(0.5, 1.5)));
}

TEST_CASE("weighted test-function constants") {
  const auto k = constants41(1, 4.0, 3.0);
  CHECK(k.beta == doctest::Approx(0.1));
  CHECK(k.b == doctest::Approx(1.25));
  for (double r : k.residuals) CHECK(r < 1e-10);
  const auto low = constants41(1, 1.5, 0.5);
  CHECK(low.beta == doctest::Approx(0.25));
  CHECK(cutoff_theta(k, 1.0) <= k.r_inj * k.r_inj / 100.0);
  CHECK(cutoff_theta(k, 0.0) == doctest::Approx(0.0025));
  CHECK_THROWS_AS(constants41(1, 4.0, 3.0, 1.0, 1), Error);
  CHECK(h_smooth(0.0, 1e-2) == doctest::Approx(0.1));
  CHECK(h_smooth(0.0, 1e-4) == doctest::Approx(0.01));
}

TEST_CASE("weighted test function on trivial data") {
  auto g = make_grid(1, 8);
  auto zero = constant_stack(g, {0.0, 0.5, 1.0}, 0.0);
  const auto k = constants41(1, 4.0, 1.0);
  auto r = check_lemma41(zero, zero, k, 0.5);
  CHECK(r.max_rho == doctest::Approx(-k.epsilon * std::pow(k.Lambda, k.beta)));
  CHECK(r.h_converges);
  CHECK(r.pass);
  CHECK(lemma41_default_target(zero, zero, k, 0.5, 1.0) >= 0.5);
}

TEST_CASE("calculus bounds for generalized operators") {
  for (int n : {1, 2}) {
    for (double r : {0.5, 1.0, 2.0}) {
      for (double C3 : {0.2, 1.0}) {
        auto h = [&](double x) { return (x - r - C3) * std::exp(n * x / (r * (n + 1))); };
        const double x = golden_min(h, -20.0, 20.0);
        CHECK(x == doctest::Approx(h_chain_argmin(n, r, C3)).epsilon(1e-6));
        CHECK(std::abs(h(x) - h_chain_minimum(n, r, C3)) <= 1e-12);
      }
    }
  }
  CHECK(h_chain_minimum(1, 1.0, 1.0) == doctest::Approx(-2.0));
  CHECK(h_chain_argmin(1, 1.0, 1.0) == 0.0);

  CHECK(A_max_value(1.0, 1.0) == 0.25);
  CHECK(A_max_point(1.0, 1.0) == 0.5);
  for (double a : {0.5, 1.0, 3.0}) {
    for (double l : {0.3, 1.0, 2.0}) {
      auto negA = [&](double y) { return -(y - l * std::pow(y, 1.0 + 1.0 / a)); };
      const double y = golden_min(negA, 0.0, 100.0);
      CHECK(std::abs(-negA(y) - A_max_value(a, l)) <= 1e-12);
      CHECK(y == doctest::Approx(A_max_point(a, l)).epsilon(1e-6));
    }
  }
  CHECK(C7_constant(1, 1.0) == 2.0);
}

TEST_CASE("sigma_1 at the reference metric") {
  OperatorSpec s1{OperatorKind::SigmaK, 2, 1, 1.0};
  HermitianMatrix id;
  std::vector<double> l{1.0, 1.0};
  auto pt = evaluate_point(s1, id, l);
  CHECK(pt.F == 2.0);
  CHECK(pt.G.a == 0.5);
  CHECK(pt.structural == doctest::Approx(1.0));
}

TEST_CASE("generalized chain along a short run") {
  for (auto op : {OperatorSpec::sigma_k(2, 1), OperatorSpec::monge_ampere(2)}) {
    auto g = make_grid(2, 8);
    auto F = ScalarField::from_function(g, [](auto x) { return 0.1 * std::cos(2 * pi * x[0]) + 0.05 * std::sin(2 * pi * x[3]); });
    FlowProblem prob{SourceData::from_field(F, 4.0), op, ThetaProfile::log()};
    auto phi0 = ScalarField::constant(g, 0.0);
    auto traj = run_flow(phi0, prob, {.T = 1.0, .checkpoint_every = 0.25});
    CHECK(traj.min_structural_all_steps >= op.gamma - 1e-8);
    auto weight = build_level_weight(traj.phi_tilde, F, 0.0, 0.0, 100.0);
    auto aux = run_aux(weight, F);
    auto r = check_generalized_chain(traj, prob, weight, aux);
    CHECK(r.points == g.size() * aux.psi.size());
    CHECK(r.min_structural_margin >= -1e-8);
    CHECK(r.min_step_slack[0] >= -1e-10);
    CHECK(r.min_step_slack[1] >= -1e-10);
    CHECK(std::abs(r.min_step_slack[2]) <= 1e-10);
    CHECK(r.pass);
  }
}

TEST_CASE("check records") {
  auto r = CheckRecord::make("demo", 1.0, 2.0, 0.0, {{"s", 0.5}});
  CHECK(r.margin == -1.0);
  CHECK(r.pass);
  auto j = r.to_json();
  CHECK(j["check"] == "demo");
  CHECK(j["params"]["s"] == 0.5);
  CHECK_FALSE(CheckRecord::make("demo", 2.0, 1.0, 0.5).pass);
}

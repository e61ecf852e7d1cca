#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mafl/flow.hpp"

using namespace mafl;
using std::numbers::pi;

namespace {
FlowProblem problem_for(const ScalarField& F, ThetaProfile theta = ThetaProfile::log()) {
  return {SourceData::from_field(F, 2.0, theta), OperatorSpec::monge_ampere(F.grid.dim()), theta};
}
ScalarField smooth_F(const TorusGrid& g, double amp) {
  return ScalarField::from_function(g, [&](auto x) { return amp * std::cos(2 * pi * x[0]) * std::sin(2 * pi * x[1]); });
}
}  // namespace

TEST_CASE("rate on simple states") {
  auto g = make_grid(1, 16);
  auto zero = ScalarField::constant(g, 0.0);
  auto p0 = problem_for(zero);
  CHECK(rhs(FlowState::initial(zero, p0), p0).max_abs() == 0.0);

  auto c = ScalarField::constant(g, 0.3);
  auto pc = problem_for(c);
  auto r = rhs(FlowState::initial(zero, pc), pc);
  for (double v : r.values) CHECK(v == doctest::Approx(-0.3));

  auto pn = problem_for(zero, ThetaProfile::neg_inverse());
  for (double v : rhs(FlowState::initial(zero, pn), pn).values) CHECK(v == doctest::Approx(-1.0));
}

TEST_CASE("source data") {
  auto g = make_grid(1, 16);
  auto s = SourceData::from_field(ScalarField::constant(g, 1.0), 2.0);
  CHECK(s.ent_p == doctest::Approx(std::exp(1.0)));
  CHECK(s.int_nF == doctest::Approx(1.0));
  CHECK(SourceData::from_field(ScalarField::constant(g, 0.0), 2.0).ent_p == 0.0);
  CHECK(SourceData::from_field(ScalarField::constant(g, 0.0), 2.0, ThetaProfile::neg_inverse()).K == 0.0);
  CHECK_THROWS(SourceData::from_field(ScalarField::constant(g, 0.0), 1.0));
}

TEST_CASE("stable time step") {
  auto g = make_grid(1, 16);
  auto zero = ScalarField::constant(g, 0.0);
  auto p = problem_for(zero);
  const double h = 1.0 / 16;
  // stiffness 1/4 at the flat state: 0.5 h^2 / (2 * 2 * 1/4)
  CHECK(stable_dt(FlowState::initial(zero, p), p) == doctest::Approx(0.5 * h * h));
  auto g2 = make_grid(1, 32);
  auto z2 = ScalarField::constant(g2, 0.0);
  auto p2 = problem_for(z2);
  CHECK(stable_dt(FlowState::initial(z2, p2), p2) == doctest::Approx(0.25 * 0.5 * h * h));
  CHECK(stable_dt_for(g, 2.0) < stable_dt_for(g, 1.0));
}

TEST_CASE("stationary state is preserved") {
  auto g = make_grid(1, 16);
  auto zero = ScalarField::constant(g, 0.0);
  auto p = problem_for(zero);
  auto s = FlowState::initial(zero, p);
  auto next = step(s, p, 0.01);
  CHECK(next.phi.max_abs() == 0.0);
  auto traj = run_flow(zero, p, {1.0, 0.25, 1e-6, {}});
  for (const auto& d : traj.diagnostics) {
    CHECK(d.sup_tilde == 0.0);
    CHECK(d.inf_tilde == 0.0);
    CHECK(d.mean_rate == 0.0);
  }
}

TEST_CASE("constant source gives a constant rate") {
  auto g = make_grid(1, 16);
  auto c = ScalarField::constant(g, 0.4);
  auto p = problem_for(c);
  auto traj = run_flow(ScalarField::constant(g, 0.0), p, {1.0, 0.5, 1e-6, {}});
  for (const auto& d : traj.diagnostics) {
    CHECK(std::abs(d.mean_rate + 0.4) < 1e-8);
    CHECK(std::abs(d.max_rate + 0.4) < 1e-8);
  }
  CHECK(traj.phi.slices.back()[0] == doctest::Approx(-0.4));
}

TEST_CASE("rk3 is third order") {
  auto g = make_grid(1, 16);
  auto F = smooth_F(g, 0.2);
  auto p = problem_for(F);
  auto phi0 = ScalarField::constant(g, 0.0);
  auto advance = [&](double dt, int steps) {
    auto s = FlowState::initial(phi0, p);
    for (int i = 0; i < steps; ++i) s = step(s, p, dt);
    return s.phi;
  };
  const double dt = 2e-3;
  auto a = advance(dt, 8), b = advance(dt / 2, 16), c = advance(dt / 4, 32);
  double e1 = 0, e2 = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    e1 = std::max(e1, std::abs(a[i] - b[i]));
    e2 = std::max(e2, std::abs(b[i] - c[i]));
  }
  CHECK(std::log2(e1 / e2) > 2.7);
}

TEST_CASE("oversized steps are rejected") {
  auto g = make_grid(1, 32);
  auto phi = ScalarField::from_function(g, [](auto x) { return 0.0004 * std::cos(2 * pi * 12 * x[0]); });
  auto p = problem_for(ScalarField::constant(g, 0.0));
  auto s = FlowState::initial(phi, p);
  try {
    step(s, p, 5.0);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepRejected);
  }
}

TEST_CASE("normalization and Jensen bound along a smooth run") {
  auto g = make_grid(1, 32);
  auto F = smooth_F(g, 0.5);
  auto p = problem_for(F);
  auto traj = run_flow(ScalarField::constant(g, 0.0), p, {0.5, 0.1, 1e-6, {}});
  for (std::size_t j = 0; j < traj.phi_tilde.size(); ++j) {
    CHECK(std::abs(mean(traj.phi_tilde.slices[j])) < 1e-12);
    CHECK(traj.diagnostics[j].mean_rate <= -p.source.int_nF + 1e-6);
  }
  CHECK(checkpoint_times(0.5, 0.1).size() == 6);
  auto rebuilt = trajectory_from_slices(traj.phi, p);
  CHECK(rebuilt.diagnostics.back().sup_tilde == traj.diagnostics.back().sup_tilde);
}

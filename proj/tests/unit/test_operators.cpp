#include <cmath>
#include <random>

#include "doctest.h"
#include "mafl/operators.hpp"

using namespace mafl;

TEST_CASE("theta profiles") {
  CHECK(ThetaProfile::log().value(1.0) == 0.0);
  CHECK(ThetaProfile::neg_inverse().value(2.0) == -0.5);
  CHECK(ThetaProfile::cube_root().value(8.0) == doctest::Approx(2.0));
  CHECK(ThetaProfile::power(2.0).prime(3.0) == doctest::Approx(6.0));
  CHECK_THROWS_AS(ThetaProfile::log().value(0.0), Error);
  CHECK_THROWS(ThetaProfile::power(-1.0));

  const ThetaProfile all[] = {ThetaProfile::log(), ThetaProfile::neg_inverse(), ThetaProfile::linear(),
                              ThetaProfile::cube_root(), ThetaProfile::power(0.7)};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (const auto& th : all) {
    for (int i = 0; i < 200; ++i) {
      double y1 = u(rng), y2 = u(rng);
      if (y1 > y2) std::swap(y1, y2);
      if (y1 == y2) continue;
      CHECK(th.value(y2) > th.value(y1));
      const double hstep = 1e-6 * y1;
      const double fd = (th.value(y1 + hstep) - th.value(y1 - hstep)) / (2 * hstep);
      CHECK(th.prime(y1) == doctest::Approx(fd).epsilon(1e-6));
      CHECK(th.log_slope(y1) == doctest::Approx(y1 * th.prime(y1)));
    }
  }
}

TEST_CASE("cone membership") {
  std::vector<double> ones{1, 1}, mixed{-1, 3}, zero{0, 0};
  CHECK(cone_check(ones, 2));
  CHECK(cone_check(mixed, 1));
  CHECK_FALSE(cone_check(mixed, 2));
  CHECK_FALSE(cone_check(zero, 1));
  CHECK_FALSE(cone_check(zero, 2));
  CHECK(sigma(2, mixed) == -3.0);
}

TEST_CASE("operator values and gradients") {
  auto ma2 = OperatorSpec::monge_ampere(2);
  std::vector<double> l{2, 3};
  CHECK(F_eval(ma2, l) == 6.0);
  auto g = F_grad(ma2, l);
  CHECK(g[0] == 3.0);
  CHECK(g[1] == 2.0);
  CHECK(structural_ratio(ma2, l) == doctest::Approx(1.0));

  auto ma1 = OperatorSpec::monge_ampere(1);
  std::vector<double> one{1};
  CHECK(F_eval(ma1, one) == 1.0);
  CHECK(F_grad(ma1, one)[0] == 1.0);

  OperatorSpec s1{OperatorKind::SigmaK, 2, 1, 1.0};
  CHECK(F_eval(s1, l) == 5.0);
  auto gs = F_grad(s1, l);
  CHECK(gs[0] == 1.0);
  CHECK(gs[1] == 1.0);

  std::vector<double> bad{-1, 3};
  CHECK_THROWS_AS(F_eval(ma2, bad), Error);
}

TEST_CASE("homogeneity, finite-difference gradients and structural bound") {
  const OperatorSpec ops[] = {OperatorSpec::monge_ampere(1), OperatorSpec::monge_ampere(2),
                              OperatorSpec::sigma_k(2, 1), OperatorSpec::sigma_k(1, 1)};
  for (const auto& op : ops) {
    std::uint64_t state = 11;
    for (int i = 0; i < 100; ++i) {
      auto lambda = random_cone_point(op.n, op.cone_index(), state);
      const double F = F_eval(op, lambda);
      for (double t : {0.5, 2.0, 10.0}) {
        auto scaled = lambda;
        for (auto& v : scaled) v *= t;
        CHECK(std::abs(F_eval(op, scaled) - std::pow(t, op.degree()) * F) <=
              1e-10 * std::pow(t, op.degree()) * F);
      }
      auto grad = F_grad(op, lambda);
      for (int j = 0; j < op.n; ++j) {
        CHECK(grad[j] > 0.0);
        auto plus = lambda, minus = lambda;
        const double hstep = 1e-6 * std::max(1.0, std::abs(lambda[j]));
        plus[j] += hstep;
        minus[j] -= hstep;
        if (!cone_check(minus, op.cone_index())) continue;
        const double fd = (F_eval(op, plus) - F_eval(op, minus)) / (2 * hstep);
        CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-6));
      }
    }
    std::uint64_t s2 = 99;
    for (int i = 0; i < 1000; ++i) {
      auto lambda = random_cone_point(op.n, op.cone_index(), s2);
      CHECK(structural_ratio(op, lambda) >= op.gamma);
    }
  }
  CHECK(OperatorSpec::monge_ampere(2).gamma == 1.0);
  CHECK(OperatorSpec::sigma_k(2, 1).gamma == doctest::Approx(0.5));
}

TEST_CASE("linearization coefficients") {
  auto g = make_grid(1, 8);
  auto flat = complex_hessian(ScalarField::constant(g, 0.0));
  auto lin = linearization_coeffs(OperatorSpec::monge_ampere(1), flat);
  CHECK(lin.coeffs[0].a == doctest::Approx(1.0));
  CHECK(lin.min_structural == doctest::Approx(1.0));

  // n=1, lambda = 4: G = 1/4 and det G * F = 1.
  HermitianHessianField h{g, std::vector<HermitianMatrix>(g.size(), {4.0, 1.0, {0, 0}}),
                          std::vector<std::array<double, 2>>(g.size(), {4.0, 0.0})};
  auto l4 = linearization_coeffs(OperatorSpec::monge_ampere(1), h);
  CHECK(l4.coeffs[0].a == doctest::Approx(0.25));
  CHECK(l4.min_structural == doctest::Approx(1.0));

  auto g2 = make_grid(2, 8);
  auto phi = ScalarField::from_function(g2, [](auto x) { return 0.01 * std::sin(2 * M_PI * (x[0] + x[3])); });
  auto h2 = complex_hessian(phi);
  auto ls = linearization_coeffs(OperatorSpec::sigma_k(2, 1), h2);
  for (std::size_t i = 0; i < g2.size(); i += 13) {
    const double tr = h2.matrices[i].trace(2);
    CHECK(ls.coeffs[i].a == doctest::Approx(1.0 / tr));
    CHECK(ls.coeffs[i].d == doctest::Approx(1.0 / tr));
    CHECK(std::abs(ls.coeffs[i].c) == 0.0);
  }
  auto flat2 = linearization_coeffs(OperatorSpec::sigma_k(2, 1), complex_hessian(ScalarField::constant(g2, 0)));
  CHECK(flat2.min_structural == doctest::Approx(1.0));
}

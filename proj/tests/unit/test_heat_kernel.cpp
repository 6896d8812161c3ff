// test_heat_kernel.cpp
//
// PURPOSE: closed-form kernels and the caloric potentials W, Lambda_0,
//          grad Lambda_0 and the divergence-form potential.
// VALIDATES: mass of Gamma by an independent trapezoid sum, heat equation
//            by finite differences, harmonicity of N, Gaussian and Fourier
//            mode solutions of the heat equation.

#include <cmath>

#include "doctest.h"
#include "dstokes/heat_kernel.hpp"

using namespace dstokes;

namespace {

// trapezoid sum over a square, spectrally accurate for a Gaussian
double mass_of_gamma(double t) {
  const double L = 14.0 * std::sqrt(t);
  const int n = 400;
  const double h = 2 * L / n;
  double s = 0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      s += eval_gamma({{-L + i * h, -L + j * h}, t});
  return s * h * h;
}

}  // namespace

TEST_CASE("Gamma has unit mass") {
  for (double t : {0.01, 0.1, 1.0})
    CHECK(std::abs(mass_of_gamma(t) - 1.0) < 1e-10);
}

TEST_CASE("Gamma solves the heat equation and derivatives agree with FD") {
  const double h = 1e-4;
  for (Vec2 x : {Vec2{0.3, -0.2}, Vec2{1.1, 0.7}})
    for (double t : {0.05, 0.5}) {
      const auto g = [&](Vec2 y, double s) { return eval_gamma({y, s}); };
      const Vec2 grad = eval_grad_gamma({x, t});
      const double fx = (g(x + Vec2{h, 0}, t) - g(x - Vec2{h, 0}, t)) / (2 * h);
      const double fy = (g(x + Vec2{0, h}, t) - g(x - Vec2{0, h}, t)) / (2 * h);
      CHECK(grad.x == doctest::Approx(fx).epsilon(1e-6));
      CHECK(grad.y == doctest::Approx(fy).epsilon(1e-6));
      const double lap = (g(x + Vec2{h, 0}, t) + g(x - Vec2{h, 0}, t) +
                          g(x + Vec2{0, h}, t) + g(x - Vec2{0, h}, t) -
                          4 * g(x, t)) / (h * h);
      const double dt = eval_dt_gamma({x, t});
      CHECK(dt == doctest::Approx(lap).epsilon(1e-4));
      const double ft = (g(x, t + h) - g(x, t - h)) / (2 * h);
      CHECK(dt == doctest::Approx(ft).epsilon(1e-5));
    }
}

TEST_CASE("Newtonian potential is harmonic away from the origin") {
  const double h = 1e-3;
  for (Vec2 x : {Vec2{1, 0}, Vec2{0.4, -0.9}, Vec2{2.5, 1.5}}) {
    const double r = (eval_newtonian(x + Vec2{h, 0}) + eval_newtonian(x - Vec2{h, 0}) +
                      eval_newtonian(x + Vec2{0, h}) + eval_newtonian(x - Vec2{0, h}) -
                      4 * eval_newtonian(x)) / (h * h);
    CHECK(std::abs(r) < 1e-6);
    const Vec2 g = eval_grad_newtonian(x);
    CHECK(g.x == doctest::Approx((eval_newtonian(x + Vec2{h, 0}) -
                                  eval_newtonian(x - Vec2{h, 0})) / (2 * h))
                     .epsilon(1e-6));
  }
  CHECK(eval_newtonian({1, 0}) == 0.0);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(eval_gamma({{0, 0}, 0.0}), DomainError);
  CHECK_THROWS_AS(eval_gamma({{0, 0}, -1.0}), DomainError);
  CHECK_THROWS_AS(eval_newtonian({0, 0}), DomainError);
  CHECK_THROWS_AS(eval_grad_newtonian({0, 0}), DomainError);
  QuadratureConfig bad;
  bad.space_resolution = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("volume potential of a constant is t") {
  for (double t : {0.01, 0.1, 1.0})
    CHECK(std::abs(volume_potential_L0([](Vec2, double) { return 1.0; },
                                       {0.2, 0.3}, t) - t) < 1e-8);
}

TEST_CASE("initial potential of a Gaussian") {
  // Gamma * exp(-|z|^2) = exp(-|x|^2 / (1 + 4t)) / (1 + 4t)
  const auto u0 = [](Vec2 z) { return std::exp(-norm2(z)); };
  for (double t : {0.01, 0.2, 1.0})
    for (Vec2 x : {Vec2{0, 0}, Vec2{0.5, -0.7}}) {
      const double d = 1 + 4 * t;
      const double exact = std::exp(-norm2(x) / d) / d;
      CHECK(initial_potential_W(u0, x, t) == doctest::Approx(exact).epsilon(1e-9));
      const Vec2 g = grad_initial_potential_W(u0, x, t);
      CHECK(g.x == doctest::Approx(-2 * x.x / d * exact).epsilon(1e-8).scale(1));
      CHECK(g.y == doctest::Approx(-2 * x.y / d * exact).epsilon(1e-8).scale(1));
    }
  CHECK(initial_potential_W(u0, {0.3, 0.1}, 0.0) == doctest::Approx(u0({0.3, 0.1})));
}

TEST_CASE("Fourier modes: Lambda_0, its gradient, divergence form") {
  const double t = 0.3;
  const Vec2 x{0.4, -0.25};
  const double decay = 1 - std::exp(-t);
  const auto c = [](Vec2 y, double) { return std::cos(y.x); };
  CHECK(volume_potential_L0(c, x, t) ==
        doctest::Approx(decay * std::cos(x.x)).epsilon(1e-8));
  const Vec2 g = grad_volume_potential(c, x, t);
  CHECK(g.x == doctest::Approx(-decay * std::sin(x.x)).epsilon(1e-6));
  CHECK(std::abs(g.y) < 1e-8);

  // div (sin y1, sin y2) = cos y1 + cos y2
  const auto F1 = [](Vec2 y, double) { return std::sin(y.x); };
  const auto F2 = [](Vec2 y, double) { return std::sin(y.y); };
  CHECK(div_form_potential(F1, F2, x, t) ==
        doctest::Approx(decay * (std::cos(x.x) + std::cos(x.y))).epsilon(1e-6));

  // time-dependent source: (d_t - Lap) L0(f) = f by finite differences
  const auto f = [](Vec2 y, double s) { return s * std::exp(-norm2(y)); };
  const double h = 1e-3;
  auto L = [&](Vec2 y, double s) { return volume_potential_L0(f, y, s); };
  const double lt = (L(x, t + h) - L(x, t - h)) / (2 * h);
  const double lap = (L(x + Vec2{h, 0}, t) + L(x - Vec2{h, 0}, t) +
                      L(x + Vec2{0, h}, t) + L(x - Vec2{0, h}, t) - 4 * L(x, t)) /
                     (h * h);
  CHECK(lt - lap == doctest::Approx(f(x, t)).epsilon(1e-4));
}

TEST_CASE("grid interpolant and sampled potentials") {
  const auto xs = linspace(-3, 3, 121);
  std::vector<Vec2> pts;
  for (double y : xs)
    for (double x : xs) pts.push_back({x, y});
  const auto u = SampledField::from_function(
      pts, {0.0, 1.0}, 1, [](Vec2 p, double t, double* v) {
        v[0] = (1 + t) * (2 * p.x - p.y + 0.5 * p.x * p.y);
      });
  const GridInterpolant I(u);
  CHECK(I({0.123, -0.456}, 0.5) ==
        doctest::Approx(1.5 * (2 * 0.123 + 0.456 - 0.5 * 0.123 * 0.456)));
  CHECK(I({5.0, 0.0}, 0.0) == 0.0);

  const auto g = SampledField::from_function(
      pts, {0.0}, 1, [](Vec2 p, double, double* v) { v[0] = std::exp(-norm2(p)); });
  const double t = 0.1, d = 1 + 4 * t;
  const auto w = initial_potential_W(g, {0.2, 0.1}, t);
  CHECK(w[0] == doctest::Approx(std::exp(-0.05 / d) / d).epsilon(2e-3));
}

// test_heat_ibvp.cpp
//
// PURPOSE: scalar heat initial-boundary value problems on planar domains.
// VALIDATES: exact Gaussian solutions (Dirichlet and Neumann), polynomial
//            solutions driven by f and div F, constants, zero data,
//            refinement behaviour.

#include "doctest.h"
#include "dstokes/heat_ibvp.hpp"
#include "dstokes/heat_kernel.hpp"

using namespace dstokes;

namespace {

const Vec2 kX0{1.5, 0.5};

std::vector<Vec2> disk_targets() {
  std::vector<Vec2> t;
  for (double r : {0.0, 0.3, 0.6, 0.9})
    for (int k = 0; k < 8; ++k) t.push_back({r * std::cos(0.25 * kPi * k), r * std::sin(0.25 * kPi * k)});
  return t;
}

double gaussian_error(bool neumann, int M, int steps) {
  HeatProblem p;
  p.T = 0.5;
  p.neumann = neumann;
  p.v0 = [](Vec2 x) { return eval_gamma({x - kX0, 1.0}); };
  if (neumann)
    p.g = [](Vec2 x, double t) { return dot(eval_grad_gamma({x - kX0, t + 1}), (1.0 / norm(x)) * x); };
  else
    p.g = [](Vec2 x, double t) { return eval_gamma({x - kX0, t + 1}); };
  HeatSolveOptions o;
  o.M = M;
  o.steps = steps;
  const auto tg = disk_targets();
  const HeatSolution s = heat_ibvp_solve(p, tg, o);
  double e = 0;
  for (std::size_t i = 0; i < tg.size(); ++i)
    for (std::size_t k = 0; k < s.times.size(); ++k)
      e = std::max(e, std::abs(s.u.at(i, k) - eval_gamma({tg[i] - kX0, s.times[k] + 1})));
  return e;
}

}  // namespace

TEST_CASE("Dirichlet Gaussian solution converges") {
  const double e1 = gaussian_error(false, 32, 16);
  const double e2 = gaussian_error(false, 64, 32);
  CHECK(e2 < 1e-4);
  CHECK(e1 / e2 > 2.0);
}

TEST_CASE("Neumann Gaussian solution") {
  CHECK(gaussian_error(true, 64, 32) < 3e-4);
}

TEST_CASE("constants and zero data are reproduced") {
  const auto tg = disk_targets();
  HeatSolveOptions o;
  o.M = 32;
  o.steps = 8;
  for (bool neumann : {false, true}) {
    HeatProblem p;
    p.T = 0.3;
    p.neumann = neumann;
    p.v0 = [](Vec2) { return 2.5; };
    if (!neumann) p.g = [](Vec2, double) { return 2.5; };
    const auto s = heat_ibvp_solve(p, tg, o);
    CHECK(s.compatibility < 1e-8);
    for (double v : s.u.values()) CHECK(v == doctest::Approx(2.5).epsilon(1e-9));

    HeatProblem z;
    z.neumann = neumann;
    const auto sz = heat_ibvp_solve(z, tg, o);
    for (double v : sz.u.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("volume source f: u = t + x1^2 on an ellipse") {
  HeatProblem p;
  p.curve = BoundaryCurve::ellipse(1.0, 0.7);
  p.T = 0.4;
  p.v0 = [](Vec2 x) { return x.x * x.x; };
  p.g = [](Vec2 x, double t) { return t + x.x * x.x; };
  p.f = [](Vec2, double) { return -1.0; };
  HeatSolveOptions o;
  o.M = 64;
  o.steps = 32;
  const std::vector<Vec2> tg{{0, 0}, {0.5, 0.2}, {-0.6, -0.3}, {0.2, 0.5}};
  const auto s = heat_ibvp_solve(p, tg, o);
  for (std::size_t i = 0; i < tg.size(); ++i)
    for (std::size_t k = 0; k < s.times.size(); ++k)
      CHECK(s.u.at(i, k) == doctest::Approx(s.times[k] + tg[i].x * tg[i].x).epsilon(1e-3));
}

TEST_CASE("divergence source F: u = t x1") {
  HeatProblem p;
  p.T = 0.4;
  p.g = [](Vec2 x, double t) { return t * x.x; };
  p.F = [](Vec2 x, double, double* v) {
    v[0] = 0.5 * x.x * x.x;
    v[1] = 0.0;
  };
  HeatSolveOptions o;
  o.M = 64;
  o.steps = 32;
  const auto tg = disk_targets();
  const auto s = heat_ibvp_solve(p, tg, o);
  double e = 0;
  for (std::size_t i = 0; i < tg.size(); ++i)
    for (std::size_t k = 0; k < s.times.size(); ++k)
      e = std::max(e, std::abs(s.u.at(i, k) - s.times[k] * tg[i].x));
  CHECK(e < 1e-3);
}

TEST_CASE("targets outside the domain are rejected") {
  HeatProblem p;
  CHECK_THROWS_AS(heat_ibvp_solve(p, {{1.2, 0}}), InvalidInput);
}

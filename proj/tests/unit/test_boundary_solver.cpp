// test_boundary_solver.cpp
//
// PURPOSE: Stokes boundary system, slab continuation, full IBVP assembly and
//          the weak-form residual.
// VALIDATES: compatibility residuals, Picard contraction and its decrease
//            with the slab length, manufactured potential flows, an exact
//            unsteady vortex (u0 route and force route), linearity, slab
//            partition independence, divergence by stencils, weak residual.

#include <random>

#include "doctest.h"
#include "dstokes/boundary_solver.hpp"
#include "dstokes/heat_kernel.hpp"

using namespace dstokes;

namespace {

// u = (d_y G, -d_x G) with G a heat kernel centred off the disk: an exact
// unsteady Stokes flow with zero pressure.
const Vec2 kX0{1.6, 0.5};
Vec2 vortex(Vec2 x, double t) {
  const Vec2 g = eval_grad_gamma({x - kX0, t});
  return {g.y, -g.x};
}

std::vector<Vec2> rings(std::initializer_list<double> radii) {
  std::vector<Vec2> t;
  for (double r : radii)
    for (int k = 0; k < 12; ++k) t.push_back({r * std::cos(k * kPi / 6 + 0.1), r * std::sin(k * kPi / 6 + 0.1)});
  return t;
}

double rel_error(const StokesSolution& s, const std::function<Vec2(Vec2, double)>& exact) {
  double e = 0, m = 0;
  for (std::size_t i = 0; i < s.u.n_points(); ++i)
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      const Vec2 ex = exact(s.u.points()[i], s.times[k]);
      e = std::max(e, norm(Vec2{s.u.at(i, k, 0), s.u.at(i, k, 1)} - ex));
      m = std::max(m, norm(ex));
    }
  return e / m;
}

SampledField random_boundary_data(const CurveNodes& nd, double dt, int steps, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> N01;
  double a[2][5][2];
  for (auto& x : a)
    for (auto& y : x)
      for (auto& z : y) z = N01(rng);
  const double w = N01(rng);
  std::vector<double> ts;
  for (int k = 0; k <= steps; ++k) ts.push_back(k * dt);
  SampledField g(nd.pos, ts, 2);
  for (int j = 0; j < nd.M; ++j)
    for (int k = 0; k <= steps; ++k) {
      double gt = 0, gn = 0;
      for (int m = 1; m <= 4; ++m) {
        gt += (a[0][m][0] * std::cos(m * nd.theta[j]) + a[0][m][1] * std::sin(m * nd.theta[j])) / m;
        gn += (a[1][m][0] * std::cos(m * nd.theta[j]) + a[1][m][1] * std::sin(m * nd.theta[j])) / m;
      }
      const double s = ts[k] * (1 + w * ts[k]);
      const Vec2 v = (s * gt) * nd.tangent[j] + (s * gn) * nd.normal[j];
      g.at(j, k, 0) = v.x;
      g.at(j, k, 1) = v.y;
    }
  return g;
}

}  // namespace

TEST_CASE("compatibility residuals") {
  StokesProblem p;
  CHECK(check_compatibility(p, 32, 4).pass);

  p.g = [](Vec2 x, double t) { return t * perp(x); };
  const auto r = check_compatibility(p, 64, 4);
  CHECK(r.flux < 1e-10);
  CHECK(r.pass);

  StokesProblem q;
  q.curve = BoundaryCurve::circle(1.5);
  q.g = [](Vec2 x, double) { return (1.0 / norm(x)) * x; };
  const auto rq = check_compatibility(q, 64, 4);
  CHECK_FALSE(rq.pass);
  CHECK(rq.flux == doctest::Approx(2 * kPi * 1.5).epsilon(1e-10));
  CHECK_THROWS_AS(solve_stokes_ibvp(q, {}), CompatibilityError);

  StokesProblem d;  // divergent initial field
  d.u0 = [](Vec2 x) { return x; };
  d.g = [](Vec2 x, double) { return x; };
  CHECK(check_compatibility(d, 32, 4).divergence == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("zero data gives zero densities and zero flow") {
  const auto c = BoundaryCurve::circle(1.0);
  const auto nd = c.nodes(16);
  SampledField g(nd.pos, linspace(0, 0.1, 5), 2);
  const auto sl = solve_boundary_system(g, c, 0.1);
  CHECK(sl.iterations == 0);
  CHECK(sl.phi.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sl.psi.cwiseAbs().maxCoeff() == 0.0);

  StokesProblem p;
  p.T = 0.2;
  StokesSolveOptions o;
  o.M = 16;
  o.steps = 4;
  const auto s = solve_stokes_ibvp(p, rings({0.0, 0.5}), o);
  for (double v : s.u.values()) CHECK(v == 0.0);
}

TEST_CASE("Picard contraction shrinks with the slab length") {
  const auto c = BoundaryCurve::circle(1.0);
  const auto nd = c.nodes(32);
  const double dt = 0.00625;
  PicardOptions po;
  po.tol = 1e-12;
  double prev = 1.0;
  for (double slab : {0.05, 0.025, 0.0125}) {
    const int steps = static_cast<int>(std::lround(slab / dt));
    const auto sl = solve_boundary_system(random_boundary_data(nd, dt, steps, 7), c, slab, po);
    CHECK(sl.contraction() <= 0.5);
    CHECK(sl.contraction() < prev);
    CHECK(sl.residual < 1e-9);
    // density invariants: psi mean-zero at every time
    for (int s = 0; s < sl.psi.cols(); ++s) {
      double m = 0;
      for (int j = 0; j < nd.M; ++j) m += sl.psi(j, s) * nd.weight[j];
      CHECK(std::abs(m) < 1e-10);
    }
    prev = sl.contraction();
  }
}

TEST_CASE("manufactured potential flow, both harmonic profiles") {
  const auto targets = rings({0.0, 0.4, 0.8});
  for (int which = 0; which < 2; ++which) {
    auto grad_h = [which](Vec2 x) {
      return which == 0 ? Vec2{2 * x.x, -2 * x.y} : Vec2{x.y, x.x};
    };
    StokesProblem p;
    p.T = 1.0;
    p.g = [&](Vec2 x, double t) { return t * t * grad_h(x); };
    auto exact = [&](Vec2 x, double t) { return t * t * grad_h(x); };
    StokesSolveOptions o;
    o.M = 32;
    o.steps = 16;
    const double e1 = rel_error(solve_stokes_ibvp(p, targets, o), exact);
    o.M = 64;
    o.steps = 32;
    const double e2 = rel_error(solve_stokes_ibvp(p, targets, o), exact);
    CHECK(e2 < 1e-2);
    CHECK(e2 < e1);
  }
}

TEST_CASE("exact vortex through the force route") {
  // u = vortex(t+1) - vortex(1): u0 = 0, f = Lap vortex(., 1) = d_t vortex at t = 1
  StokesProblem p;
  p.T = 0.5;
  p.g = [](Vec2 x, double t) { return vortex(x, t + 1) - vortex(x, 1.0); };
  p.f = [](Vec2 x, double) {
    const double h = 1e-4;
    return (0.5 / h) * (vortex(x, 1 + h) - vortex(x, 1 - h));
  };
  StokesSolveOptions o;
  o.M = 32;
  o.steps = 16;
  const auto s = solve_stokes_ibvp(p, rings({0.0, 0.4, 0.8}), o);
  CHECK(rel_error(s, [](Vec2 x, double t) { return vortex(x, t + 1) - vortex(x, 1.0); }) < 2e-3);
  CHECK(s.report.boundary_residual < 1e-9);
  CHECK(s.report.estimate_ratio() > 0);

  // stencil divergence of the assembled flow
  const double h = 1e-3;
  std::vector<Vec2> st;
  for (Vec2 c : {Vec2{0.1, 0.2}, Vec2{-0.4, 0.3}, Vec2{0.2, -0.5}})
    for (Vec2 d : {Vec2{h, 0}, Vec2{-h, 0}, Vec2{0, h}, Vec2{0, -h}}) st.push_back(c + d);
  const auto sd = solve_stokes_ibvp(p, st, o);
  for (std::size_t k = 1; k < sd.times.size(); ++k)
    for (int c = 0; c < 3; ++c) {
      const double div = (sd.u.at(4 * c, k, 0) - sd.u.at(4 * c + 1, k, 0) +
                          sd.u.at(4 * c + 2, k, 1) - sd.u.at(4 * c + 3, k, 1)) /
                         (2 * h);
      CHECK(std::abs(div) < 1e-4);
    }
}

TEST_CASE("exact vortex through the initial-data route") {
  StokesProblem p;
  p.T = 0.5;
  p.u0 = [](Vec2 x) { return vortex(x, 1.0); };
  p.g = [](Vec2 x, double t) { return vortex(x, t + 1); };
  StokesSolveOptions o;
  o.M = 32;
  o.steps = 16;
  const auto s = solve_stokes_ibvp(p, rings({0.0, 0.4, 0.8}), o);
  CHECK(s.report.initial_mismatch < 1e-4);
  CHECK(rel_error(s, [](Vec2 x, double t) { return vortex(x, t + 1); }) < 1e-2);
}

TEST_CASE("solve is linear in the data jointly") {
  auto make = [](double a, double b) {
    StokesProblem p;
    p.T = 0.2;
    p.u0 = [a](Vec2 x) { return a * vortex(x, 1.0); };
    p.g = [a, b](Vec2 x, double t) { return a * vortex(x, t + 1) + b * t * Vec2{x.y, x.x}; };
    p.f = [b](Vec2 x, double t) { return b * t * Vec2{-x.y, x.x}; };
    p.F = [a](Vec2 x, double t, double* v) {
      v[0] = a * t * x.x;
      v[1] = 0;
      v[2] = 0;
      v[3] = -a * t * x.y;
    };
    return p;
  };
  StokesSolveOptions o;
  o.M = 16;
  o.steps = 4;
  o.box.n = 64;
  o.picard.tol = 1e-13;
  const auto tg = rings({0.0, 0.5});
  const auto s1 = solve_stokes_ibvp(make(1, 0), tg, o);
  const auto s2 = solve_stokes_ibvp(make(0, 1), tg, o);
  const auto s3 = solve_stokes_ibvp(make(2, -3), tg, o);
  const SampledField comb = 2.0 * s1.u - 3.0 * s2.u;
  CHECK(sup_norm(comb - s3.u) < 1e-8 * sup_norm(s3.u));
}

TEST_CASE("slab partition does not change the solution") {
  StokesProblem p;
  p.T = 0.5;
  p.g = [](Vec2 x, double t) { return vortex(x, t + 1) - vortex(x, 1.0); };
  p.f = [](Vec2 x, double) {
    const double h = 1e-4;
    return (0.5 / h) * (vortex(x, 1 + h) - vortex(x, 1 - h));
  };
  StokesSolveOptions o;
  o.M = 32;
  o.steps = 16;
  const auto tg = rings({0.0, 0.6});
  const auto one = solve_stokes_ibvp(p, tg, o);
  o.slab_T = 0.125;
  const auto four = solve_stokes_ibvp(p, tg, o);
  CHECK(one.report.slab_lengths.size() == 1);
  CHECK(four.report.slab_lengths.size() == 4);
  CHECK(sup_norm(one.u - four.u) < 1e-3 * sup_norm(one.u));
}

TEST_CASE("assemble_interior of a zero density") {
  const auto ops = build_boundary_operators(BoundaryCurve::circle(1.0), 16, 0.1, 3);
  SpaceTimeDensity d{Eigen::MatrixXd::Zero(16, 4), Eigen::MatrixXd::Zero(16, 4)};
  int near = -1;
  const auto u = assemble_interior(d, ops, {{0.2, 0.1}, {0.0, 0.99}}, {}, 1, &near);
  for (double v : u.values()) CHECK(v == 0.0);
  CHECK(near == 1);
}

TEST_CASE("weak residual") {
  const auto xs = linspace(-0.6, 0.6, 25), ys = linspace(-0.6, 0.6, 25);
  const auto ts = linspace(0.0, 1.0, 41);
  auto bump = [](double r) { return r < 1 ? std::pow(1 - r * r, 4) : 0.0; };
  const auto test = divergence_free_test_field(xs, ys, ts, [&](Vec2 x, double t) {
    return bump(norm(x) / 0.5) * bump(std::abs(t - 0.5) / 0.4);
  });
  std::vector<Vec2> pts = test.points();

  SampledField zero(pts, ts, 2);
  CHECK(weak_residual(zero, test) == 0.0);

  // potential flow with f = F = 0
  auto u = SampledField::from_function(pts, ts, 2, [](Vec2 x, double t, double* v) {
    v[0] = 2 * t * t * x.x;
    v[1] = -2 * t * t * x.y;
  });
  double gu = 0, gp = 0;
  for (std::size_t k = 0; k < ts.size(); ++k)
    for (std::size_t i = 0; i < pts.size(); ++i) gp = std::max(gp, norm(Vec2{test.at(i, k, 0), test.at(i, k, 1)}));
  gu = 2.0;
  CHECK(weak_residual(u, test) < 1e-3 * gu * gp);

  // a gradient test field is rejected
  auto bad = SampledField::from_function(pts, ts, 2, [](Vec2 x, double, double* v) {
    v[0] = x.x;
    v[1] = x.y;
  });
  CHECK_THROWS_AS(weak_residual(u, bad), InvalidInput);
}

TEST_CASE("weak residual of a computed flow with a body force") {
  StokesProblem p;
  p.T = 0.5;
  p.g = [](Vec2 x, double t) { return vortex(x, t + 1) - vortex(x, 1.0); };
  auto f = [](Vec2 x, double) {
    const double h = 1e-4;
    return (0.5 / h) * (vortex(x, 1 + h) - vortex(x, 1 - h));
  };
  p.f = f;
  StokesSolveOptions o;
  o.M = 32;
  o.steps = 16;
  const auto xs = linspace(-0.5, 0.5, 21), ys = linspace(-0.5, 0.5, 21);
  const auto ts = linspace(0.0, 0.5, 17);
  auto bump = [](double r) { return r < 1 ? std::pow(1 - r * r, 4) : 0.0; };
  const auto test = divergence_free_test_field(xs, ys, ts, [&](Vec2 x, double t) {
    return bump(norm(x) / 0.45) * bump(std::abs(t - 0.25) / 0.24);
  });
  const auto s = solve_stokes_ibvp(p, test.points(), o);
  // scale: the force term alone
  SampledField zero(test.points(), ts, 2);
  const double scale = weak_residual(zero, test, f);
  CHECK(scale > 0);
  auto ex = SampledField::from_function(test.points(), ts, 2, [](Vec2 x, double t, double* v) {
    const Vec2 a = vortex(x, t + 1) - vortex(x, 1.0);
    v[0] = a.x;
    v[1] = a.y;
  });
  const double r = weak_residual(s.u, test, f);
  CHECK(r < 1e-2 * scale);
  // the grid's own quadrature floor dominates: exact and computed agree
  CHECK(std::abs(r - weak_residual(ex, test, f)) < 1e-3 * scale);
}

TEST_CASE("invalid targets are rejected") {
  StokesProblem p;
  CHECK_THROWS_AS(solve_stokes_ibvp(p, {{1.5, 0.0}}), InvalidInput);
}

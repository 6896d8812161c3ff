// test_holder_norms.cpp
//
// PURPOSE: discrete Holder, Dini and mixed boundary seminorm estimators.
// VALIDATES: closed-form sups, brute-force oracles written independently of
//            the library scan, homogeneity / subadditivity / refinement
//            monotonicity, determinism across worker counts, Dini integral.

#include <random>
#include <sstream>

#include "doctest.h"
#include "dstokes/holder_norms.hpp"

using namespace dstokes;

namespace {

SampledField line_field(const std::vector<double>& xs,
                        const std::vector<double>& ts,
                        const std::function<double(double, double)>& f) {
  std::vector<Vec2> pts;
  for (double x : xs) pts.push_back({x, 0.0});
  return SampledField::from_function(
      pts, ts, 1, [&](Vec2 p, double t, double* v) { v[0] = f(p.x, t); });
}

double brute_space(const SampledField& f, double a) {
  double m = 0;
  for (std::size_t t = 0; t < f.n_times(); ++t)
    for (std::size_t i = 0; i < f.n_points(); ++i)
      for (std::size_t j = 0; j < f.n_points(); ++j) {
        if (i == j) continue;
        const double r = norm(f.points()[i] - f.points()[j]);
        m = std::max(m, std::abs(f.at(i, t) - f.at(j, t)) / std::pow(r, a));
      }
  return m;
}

double brute_time(const SampledField& f, double e) {
  double m = 0;
  for (std::size_t p = 0; p < f.n_points(); ++p)
    for (std::size_t s = 0; s < f.n_times(); ++s)
      for (std::size_t t = 0; t < f.n_times(); ++t) {
        if (s == t) continue;
        const double d = std::abs(f.times()[t] - f.times()[s]);
        m = std::max(m, std::abs(f.at(p, t) - f.at(p, s)) / std::pow(d, e));
      }
  return m;
}

}  // namespace

TEST_CASE("space seminorm: constant, linear, square root") {
  const auto xs = linspace(0, 1, 101);
  const std::vector<double> ts{0.0, 1.0};
  auto c = line_field(xs, ts, [](double, double) { return 3.0; });
  CHECK(space_seminorm(c, 0.5) == 0.0);

  auto lin = line_field(xs, ts, [](double x, double) { return x; });
  const auto r = space_seminorm_scan(lin, 0.5);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.pair.i == 0);
  CHECK(r.pair.j == 100);
  CHECK(r.pair.s == 0);

  auto sq = line_field(xs, ts, [](double x, double) { return std::sqrt(x); });
  const auto q = space_seminorm_scan(sq, 0.5);
  CHECK(q.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.pair.i == 0);
  CHECK(q.value == doctest::Approx(brute_space(sq, 0.5)).epsilon(1e-14));
}

TEST_CASE("space seminorm rejects a single point") {
  SampledField f({{0, 0}}, {0.0, 1.0}, 1);
  CHECK_THROWS_AS(space_seminorm(f, 0.5), InvalidInput);
  CHECK_THROWS_AS(space_seminorm(line_field({0, 1}, {0}, [](double, double) {
                                   return 0.0;
                                 }),
                                 1.5),
                  InvalidInput);
}

TEST_CASE("time seminorm: linear and square root in time") {
  const std::vector<double> xs{0.0, 0.5};
  auto lin = line_field(xs, linspace(0, 1, 21), [](double, double t) { return t; });
  const auto r = time_seminorm_scan(lin, 0.25);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.pair.s == 0);
  CHECK(r.pair.t == 20);

  auto sq = line_field(xs, linspace(0, 1, 21),
                       [](double, double t) { return std::sqrt(t); });
  const auto q = time_seminorm_scan(sq, 0.5);
  CHECK(q.value == doctest::Approx(1.0).epsilon(1e-12));
  // every pair (0, t) attains 1; rounding picks the winner
  CHECK(q.pair.s == 0);

  auto flat = line_field(xs, linspace(0, 1, 5), [](double x, double) { return x; });
  CHECK(time_seminorm(flat, 0.25) == 0.0);
  SampledField one({{0, 0}, {1, 0}}, {0.0}, 1);
  CHECK_THROWS_AS(time_seminorm(one, 0.25), InvalidInput);
}

TEST_CASE("parabolic norm of x + t on the unit square") {
  const auto g = linspace(0, 1, 11);
  auto f = line_field(g, g, [](double x, double t) { return x + t; });
  const auto rep = parabolic_norm(f, 0.5);
  CHECK(rep.sup_norm == doctest::Approx(2.0));
  CHECK(rep.space_seminorm == doctest::Approx(brute_space(f, 0.5)));
  CHECK(rep.time_seminorm == doctest::Approx(brute_time(f, 0.25)));

  auto z = line_field(g, g, [](double, double) { return 0.0; });
  const auto zr = parabolic_norm(z, 0.5);
  CHECK(zr.sup_norm == 0.0);
  CHECK(zr.space_seminorm == 0.0);
  CHECK(zr.time_seminorm == 0.0);
}

TEST_CASE("Dini seminorm") {
  const auto xs = linspace(0, 1, 51);
  auto lin = line_field(xs, {0.0, 1.0}, [](double x, double) { return x; });
  CHECK(dini_seminorm(lin, 0.0, DiniModulus::power(1.0)) ==
        doctest::Approx(1.0));
  auto c = line_field(xs, {0.0, 1.0}, [](double, double) { return 1.0; });
  CHECK(dini_seminorm(c, 0.0, DiniModulus::log_power(2)) == 0.0);

  // |x|^{1/2} against r^{1/2} / (1 + |ln r|)^2 grows as the grid refines
  double prev = 0;
  for (int n : {11, 41, 161, 641}) {
    auto f = line_field(linspace(0, 1, n), {0.0, 1.0},
                        [](double x, double) { return std::sqrt(x); });
    const double v = dini_seminorm(f, 0.5, DiniModulus::log_power(2));
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("degenerate modulus is rejected") {
  auto f = line_field(linspace(0, 1, 5), {0.0, 1.0},
                      [](double x, double) { return x; });
  DiniModulus bad;
  bad.eval = [](double) { return 0.0; };
  CHECK_THROWS_AS(dini_seminorm(f, 0.0, bad), DegenerateModulus);
  CHECK_THROWS_AS(DiniModulus::tabulated({0.1, 1.0}, {0.0, 1.0}),
                  DegenerateModulus);
}

TEST_CASE("mixed boundary seminorm") {
  const auto xs = linspace(0, 1, 9);
  const auto ts = linspace(0, 1, 7);
  auto sep = line_field(xs, ts, [](double x, double t) {
    return std::sin(3 * x) + t * t;
  });
  const auto eta = DiniModulus::log_power(2);
  CHECK(mixed_boundary_seminorm(sep, 0.5, eta) == doctest::Approx(0.0).epsilon(1e-12));

  // product field against a direct quadruple loop
  auto p = [](double x) { return std::cos(2 * x) + x; };
  auto b = [](double t) { return std::sqrt(t) + t; };
  auto prod = line_field(xs, ts, [&](double x, double t) { return p(x) * b(t); });
  double oracle = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j)
      for (std::size_t s = 0; s < ts.size(); ++s)
        for (std::size_t t = 0; t < ts.size(); ++t) {
          if (i == j || s == t) continue;
          const double cd = std::abs((p(xs[i]) - p(xs[j])) * (b(ts[t]) - b(ts[s])));
          oracle = std::max(oracle, cd / (std::pow(std::abs(ts[t] - ts[s]), 0.25) *
                                          eta(std::abs(xs[i] - xs[j]))));
        }
  CHECK(mixed_boundary_seminorm(prod, 0.5, eta) ==
        doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("homogeneity, subadditivity, determinism") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<Vec2> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({U(rng), U(rng)});
  const auto ts = linspace(0, 1, 12);
  auto rnd = [&] {
    SampledField f(pts, ts, 2);
    for (auto& v : f.values()) v = U(rng);
    return f;
  };
  const auto f = rnd(), g = rnd();
  const auto eta = DiniModulus::power(0.3, 4.0);
  for (double c : {-2.5, 0.3}) {
    CHECK(space_seminorm(c * f, 0.4) ==
          doctest::Approx(std::abs(c) * space_seminorm(f, 0.4)).epsilon(1e-14));
    CHECK(mixed_boundary_seminorm(c * f, 0.5, eta) ==
          doctest::Approx(std::abs(c) * mixed_boundary_seminorm(f, 0.5, eta))
              .epsilon(1e-14));
  }
  CHECK(space_seminorm(f + g, 0.4) <=
        space_seminorm(f, 0.4) + space_seminorm(g, 0.4) + 1e-12);
  CHECK(time_seminorm(f + g, 0.2) <=
        time_seminorm(f, 0.2) + time_seminorm(g, 0.2) + 1e-12);
  CHECK(mixed_boundary_seminorm(f + g, 0.5, eta) <=
        mixed_boundary_seminorm(f, 0.5, eta) +
            mixed_boundary_seminorm(g, 0.5, eta) + 1e-12);

  const auto a = mixed_boundary_seminorm_scan(f, 0.5, eta, ScanMode::Exact, 1);
  const auto b = mixed_boundary_seminorm_scan(f, 0.5, eta, ScanMode::Exact, 3);
  CHECK(a.value == b.value);
  CHECK(a.pair.i == b.pair.i);
  CHECK(a.pair.j == b.pair.j);
  CHECK(a.pair.s == b.pair.s);
  CHECK(a.pair.t == b.pair.t);
  const auto s = parabolic_norm(f, 0.5, ScanMode::Screened);
  const auto e = parabolic_norm(f, 0.5, ScanMode::Exact);
  CHECK(s.space_seminorm <= e.space_seminorm);
  CHECK(s.time_seminorm <= e.time_seminorm);

  // embedding: seminorm with a smaller exponent bounded by diam^{a-a'}
  double diam = 0;
  for (auto& p : pts)
    for (auto& q : pts) diam = std::max(diam, norm(p - q));
  CHECK(space_seminorm(f, 0.3) <=
        std::pow(diam, 0.6 - 0.3) * space_seminorm(f, 0.6) + 1e-12);
}

TEST_CASE("estimators are monotone under refinement") {
  auto fn = [](double x, double t) { return std::sqrt(std::abs(x - 0.3)) * (1 + t); };
  double prev_s = 0, prev_m = 0;
  for (int n : {5, 9, 17, 33}) {
    auto f = line_field(linspace(0, 1, n), linspace(0, 1, n), fn);
    const double s = space_seminorm(f, 0.5);
    const double m = mixed_boundary_seminorm(f, 0.5, DiniModulus::log_power(2));
    CHECK(s >= prev_s);
    CHECK(m >= prev_m);
    prev_s = s;
    prev_m = m;
  }
}

TEST_CASE("Dini integral") {
  CHECK(dini_integral(DiniModulus::power(1.0), 1.0) ==
        doctest::Approx(1.0).epsilon(1e-10));
  // int_0^{1/e} dr / (r (1 + |ln r|)^2) = int_1^inf ds / (1+s)^2 = 1/2
  const double v = dini_integral(DiniModulus::log_power(2), std::exp(-1.0));
  CHECK(v == doctest::Approx(0.5).epsilon(1e-5));
  try {
    dini_integral(DiniModulus::log_power(1), 1.0);
    FAIL("expected a Dini violation");
  } catch (const DiniViolation& e) {
    REQUIRE(e.partial_sums.size() > 10);
    CHECK(e.partial_sums.back() > e.partial_sums.front());
  }
  CHECK_THROWS_AS(dini_integral(DiniModulus::power(1.0, 0.5), 1.0), InvalidInput);
}

TEST_CASE("tabulated modulus clamps below its first sample") {
  const auto m = DiniModulus::tabulated({1e-3, 1e-2, 1e-1, 1.0}, {0.1, 0.2, 0.4, 1.0});
  CHECK(m(1e-6) == doctest::Approx(0.1));
  CHECK(m(1e-2) == doctest::Approx(0.2));
  CHECK(m(std::sqrt(1e-3 * 1e-2)) == doctest::Approx(0.15));
}

TEST_CASE("field CSV round trip") {
  auto f = line_field(linspace(0, 1, 4), linspace(0, 1, 3),
                      [](double x, double t) { return x * 10 + t; });
  std::stringstream ss;
  write_field_csv(ss, f);
  const auto g = read_field_csv(ss);
  REQUIRE(g.n_points() == 4);
  REQUIRE(g.n_times() == 3);
  for (std::size_t i = 0; i < f.values().size(); ++i)
    CHECK(g.values()[i] == f.values()[i]);
  std::stringstream bad("x,y,v\n1,2,3\n");
  CHECK_THROWS_AS(read_field_csv(bad), InvalidInput);
}

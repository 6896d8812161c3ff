#include <cmath>

#include "doctest.h"
#include "dstokes/counterexample.hpp"

using namespace dstokes;

namespace {

// Taylor series of the Dawson function, fine for |x| < 2
double dawson_series(double x) {
  double term = x, sum = x;
  for (int n = 1; n < 80; ++n) {
    term *= -2.0 * x * x / (2.0 * n + 1.0);
    sum += term;
  }
  return sum;
}

double hilbert_of_indicator(double a, double b, double y) {
  return std::log(std::abs((y - a) / (y - b))) / kPi;
}

}  // namespace

TEST_CASE("g2 closed forms and support") {
  for (double t : {1e-4, 1e-2, 0.1}) {
    const double x = std::sqrt(t);
    const double expect = std::pow(2 * t, 0.25) * (kPi / 4) * (kPi / 4);
    CHECK(g2_eval(x, t, 0.5) == doctest::Approx(expect).epsilon(1e-13));
  }
  CHECK(g2_eval(0.1, 0.01, 0.5) == doctest::Approx(0.2319729).epsilon(1e-6));
  CHECK(g2_eval(-0.2, 0.1, 0.5) == 0.0);
  CHECK(g2_eval(0.2, 0.0, 0.5) == 0.0);
  CHECK(g2_eval(0.2, -1.0, 0.5) == 0.0);
  CHECK(g2_eval(1.0, 0.1, 0.5) == 0.0);
  for (double x = -1.2; x <= 1.2; x += 0.013)
    for (double t : {1e-6, 1e-3, 0.5}) CHECK(g2_eval(x, t, 0.3) >= 0.0);
  CHECK(plateau_bump(0.49) == 1.0);
  CHECK(plateau_bump(-0.5) == 1.0);
  CHECK(plateau_bump(1.0) == 0.0);
  CHECK(plateau_bump(0.75) == doctest::Approx(0.5));
}

TEST_CASE("dawson function") {
  for (double x : {-1.7, -0.3, 0.0, 0.01, 0.5, 0.9241388730, 1.9})
    CHECK(dawson(x) == doctest::Approx(dawson_series(x)).epsilon(1e-12));
  CHECK(dawson(50.0) * 100.0 == doctest::Approx(1.0 + 1.0 / 5000.0).epsilon(1e-6));
}

TEST_CASE("graded quadrature on endpoint singularities") {
  CHECK(graded_integral([](double x) { return std::sqrt(x); }, 0, 1, true, false) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(graded_integral([](double x) { return std::log(x); }, 0, 1, true, false) ==
        doctest::Approx(-1.0).epsilon(1e-11));
  CHECK(graded_integral([](double x) { return std::pow(1 - x, -0.5); }, 0, 1, false, true) ==
        doctest::Approx(2.0).epsilon(1e-5));
  CHECK(graded_integral([](double x) { return std::cos(x); }, 0, 2, false, false) ==
        doctest::Approx(std::sin(2.0)).epsilon(1e-14));
}

TEST_CASE("Hilbert transform against classical pairs") {
  LineFunction lorentz;
  lorentz.f = [](double z) { return 1.0 / (1.0 + z * z); };
  double err = 0;
  for (double y = -30; y <= 30; y += 0.77)
    err = std::max(err, std::abs(hilbert_transform(lorentz, y) - y / (1 + y * y)));
  CHECK(err < 1e-4);
  CHECK(std::abs(hilbert_transform(lorentz, 0.0)) < 1e-14);

  LineFunction box;
  box.f = [](double z) { return z > -0.5 && z < 1.5 ? 1.0 : 0.0; };
  box.lo = -0.5;
  box.hi = 1.5;
  for (double y : {-3.0, -0.6, 0.0, 0.3, 1.49, 2.0, 7.0})
    CHECK(hilbert_transform(box, y) ==
          doctest::Approx(hilbert_of_indicator(-0.5, 1.5, y)).epsilon(1e-9));
}

TEST_CASE("Hilbert transform is anti-self-adjoint") {
  LineFunction f, g;
  f.f = [](double z) { return plateau_bump(z); };
  f.lo = -1;
  f.hi = 1;
  f.kinks = {-0.5, 0.5};
  g.f = [](double z) { return z * plateau_bump(2 * (z - 0.3)); };
  g.lo = -0.2;
  g.hi = 0.8;
  g.kinks = {0.05, 0.55};
  const auto pair = [](const LineFunction& a, const LineFunction& b) {
    return graded_integral([&](double y) { return hilbert_transform(a, y) * b.f(y); }, b.lo, b.hi,
                           true, true, 2, 20);
  };
  const double fg = pair(f, g), gf = pair(g, f);
  CHECK(std::abs(fg) > 1e-3);
  CHECK(std::abs(fg + gf) < 1e-6);
}

TEST_CASE("Gaussian average of Hg2 agrees with the direct Hilbert route") {
  const CounterexampleConfig c;
  for (double s : {1e-3, 1e-2})
    for (double tau : {1e-6, 1e-4, 1e-2}) {
      const LineFunction g = g2_line(s, c.alpha);
      const double h = 2 * std::sqrt(tau);
      const auto f = [&](double xi) { return std::exp(-xi * xi) * hilbert_transform(g, h * xi); };
      const double direct = (graded_integral(f, -6, 0, false, true, 2, 30) +
                             graded_integral(f, 0, 6, true, false, 2, 30)) /
                            std::sqrt(kPi);
      CHECK(gaussian_averaged_hilbert(tau, s, c) == doctest::Approx(direct).epsilon(1e-5));
    }
}

TEST_CASE("I2 and I3 boundary limits") {
  const CounterexampleConfig c;
  const double t = 0.01;
  const double H0 = hilbert_transform(g2_line(t, c.alpha), 0.0);
  CHECK(H0 < 0);
  // double-layer jump: I2 -> Hg2(0,t)/2; I3 -> int g2 / z = -pi Hg2(0,t)
  CHECK(I2_eval(1e-10, t, c) == doctest::Approx(0.5 * H0).epsilon(1e-3));
  CHECK(I3_eval(1e-10, t, c) == doctest::Approx(-kPi * H0).epsilon(1e-3));
  CHECK(I2_eval(0.01, 0.0, c) == 0.0);
  CHECK(I3_eval(0.01, -1.0, c) == 0.0);
  CHECK_THROWS_AS(I3_eval(0.0, t, c), InvalidInput);
}

TEST_CASE("I2 and I3 refinement") {
  CounterexampleConfig c1, c2;
  c2.resolution = 2;
  CHECK(std::abs(I3_eval(0.01, 0.01, c1) - I3_eval(0.01, 0.01, c2)) < 1e-6);
  CHECK(std::abs(I2_eval(0.01, 0.01, c1) - I2_eval(0.01, 0.01, c2)) < 1e-5);
  CHECK(std::abs(I2_eval(1e-3, 0.05, c1) - I2_eval(1e-3, 0.05, c2)) < 1e-5);
  CHECK(i3_lower_constant(c1) > 0);
  const double C1 = i2_fan_constant(c1), C2 = i2_fan_constant(c2);
  CHECK(std::isfinite(C1));
  CHECK(std::abs(C1 - C2) < 1e-5 * C1);
  const double D1 = hilbert_decay_constant(0.01, c1), D2 = hilbert_decay_constant(0.01, c2);
  CHECK(D1 > 0);
  CHECK(std::abs(D1 - D2) < 1e-6 * D1);
}

TEST_CASE("Holder quotient grows like ln(1/t)") {
  CounterexampleConfig c;
  const QuotientSweep s1 = holder_quotient_sweep(c);
  REQUIRE(s1.rows.size() == 13);
  CHECK(s1.fit.slope > 0);
  CHECK(s1.fit.r2 > 0.95);
  for (std::size_t k = 1; k < s1.rows.size(); ++k) CHECK(s1.rows[k - 1].Q > s1.rows[k].Q);
  c.resolution = 2;
  const QuotientSweep s2 = holder_quotient_sweep(c);
  CHECK(std::abs(s2.fit.slope - s1.fit.slope) < 0.05 * s1.fit.slope);
}

TEST_CASE("mixed Dini seminorm of g2 diverges while its parabolic norm settles") {
  CounterexampleConfig c;
  const DiniGrowth d = dini_divergence_check(c, DiniModulus::log_power(2.0));
  REQUIRE(d.levels.size() == 4);
  CHECK(d.strictly_increasing);
  CHECK(d.diverges);
  CHECK(d.growth() >= 10.0);
  CHECK(d.parabolic_drift() < 0.05);

  const DiniGrowth p = dini_divergence_check(c, DiniModulus::power(0.1));
  CHECK(p.strictly_increasing);

  const DiniGrowth sep = dini_divergence_check(
      c, DiniModulus::log_power(2.0),
      [](double x, double t) { return std::sin(3 * x) + std::sqrt(std::abs(t)); });
  for (const DiniLevel& l : sep.levels) CHECK(l.mixed == 0.0);
  CHECK_FALSE(sep.diverges);
}

TEST_CASE("counterexample config validation") {
  CounterexampleConfig c;
  c.alpha = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = {};
  c.t_min = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = {};
  c.t_min = 0.2;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = {};
  const auto t = c.t_grid();
  CHECK(t.front() == doctest::Approx(1e-4));
  CHECK(t.back() == 0.1);
  CHECK(t[1] / t[0] == doctest::Approx(t[2] / t[1]));
}

#include "dstokes/counterexample.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "dstokes/faddeeva.hpp"
#include "dstokes/helmholtz.hpp"

namespace dstokes {

void CounterexampleConfig::validate() const {
  if (!(alpha > 0 && alpha < 1)) throw InvalidInput("alpha must lie in (0,1)");
  if (!(t_min > 0) || !(t_min < t_max)) throw InvalidInput("need 0 < t_min < t_max");
  if (n_t < 3) throw InvalidInput("n_t must be >= 3");
  if (resolution < 1) throw InvalidInput("resolution must be >= 1");
  if (levels < 2) throw InvalidInput("levels must be >= 2");
  if (per_decade < 2) throw InvalidInput("per_decade must be >= 2");
}

std::vector<double> CounterexampleConfig::t_grid() const {
  std::vector<double> t(static_cast<std::size_t>(n_t));
  const double r = std::log(t_max / t_min) / (n_t - 1);
  for (int k = 0; k < n_t; ++k) t[k] = t_min * std::exp(r * k);
  t.back() = t_max;
  return t;
}

double plateau_bump(double x) { return extension_cutoff(2.0 * std::abs(x) - 1.0); }

double g2_eval(double x1, double t, double alpha) {
  if (!(x1 > 0) || !(t > 0) || x1 >= 1.0) return 0.0;
  const double a = std::pow(x1, alpha), b = std::pow(t, 0.5 * alpha);
  return std::pow(x1 * x1 + t, 0.5 * alpha) * std::atan(a / b) * std::atan(b / a) *
         plateau_bump(x1);
}

double dawson(double x) {
  return 0.5 * std::sqrt(kPi) * faddeeva_w(std::complex<double>(x, 0.0)).imag();
}

double graded_integral(const std::function<double(double)>& f, double a, double b, bool grade_a,
                       bool grade_b, int per_octave, int depth) {
  using Rule = boost::math::quadrature::gauss<double, 15>;
  if (!(b > a)) return 0.0;
  if (grade_a && grade_b) {
    const double m = 0.5 * (a + b);
    return graded_integral(f, a, m, true, false, per_octave, depth) +
           graded_integral(f, m, b, false, true, per_octave, depth);
  }
  if (!grade_a && !grade_b) {
    const int n = 2 * per_octave;
    double s = 0;
    for (int k = 0; k < n; ++k)
      s += Rule::integrate(f, a + (b - a) * k / n, a + (b - a) * (k + 1) / n);
    return s;
  }
  // geometric panels towards the graded end
  const int n = depth * per_octave;
  const double L = b - a;
  double s = 0, outer = L;
  for (int k = 1; k <= n; ++k) {
    const double inner = L * std::exp2(-static_cast<double>(k) / per_octave);
    s += grade_a ? Rule::integrate(f, a + inner, a + outer)
                 : Rule::integrate(f, b - outer, b - inner);
    outer = inner;
  }
  s += grade_a ? Rule::integrate(f, a, a + outer) : Rule::integrate(f, b - outer, b);
  return s;
}

double hilbert_transform(const LineFunction& g, double y, int per_octave) {
  const double tiny = 1e-14 * (1.0 + std::abs(y));
  std::vector<double> marks = g.kinks;
  if (std::isfinite(g.lo)) marks.push_back(g.lo);
  if (std::isfinite(g.hi)) marks.push_back(g.hi);
  double delta = std::numeric_limits<double>::infinity();
  for (double m : marks)
    if (std::abs(m - y) > tiny) delta = std::min(delta, 0.5 * std::abs(m - y));
  if (!std::isfinite(delta)) delta = 1.0;

  // folded symmetric window
  double s = graded_integral([&](double r) { return (g.f(y - r) - g.f(y + r)) / r; }, 0.0, delta,
                             true, false, per_octave);

  const auto kernel = [&](double z) { return g.f(z) / (y - z); };
  std::vector<double> left{y - delta}, right{y + delta};
  for (double m : marks) {
    if (m < y - delta) left.push_back(m);
    if (m > y + delta) right.push_back(m);
  }
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  const auto pieces = [&](const std::vector<double>& p) {
    for (std::size_t k = 0; k + 1 < p.size(); ++k)
      s += graded_integral(kernel, p[k], p[k + 1], true, true, per_octave, 30);
  };
  pieces(left);
  pieces(right);

  boost::math::quadrature::exp_sinh<double> tail;
  if (!std::isfinite(g.lo) || g.lo < left.front()) {
    if (std::isfinite(g.lo))
      s += graded_integral(kernel, g.lo, left.front(), true, true, per_octave, 30);
    else
      s += tail.integrate([&](double u) { return kernel(left.front() - u); }, 0.0,
                          std::numeric_limits<double>::infinity());
  }
  if (!std::isfinite(g.hi) || g.hi > right.back()) {
    if (std::isfinite(g.hi))
      s += graded_integral(kernel, right.back(), g.hi, true, true, per_octave, 30);
    else
      s += tail.integrate([&](double u) { return kernel(right.back() + u); }, 0.0,
                          std::numeric_limits<double>::infinity());
  }
  return s / kPi;
}

LineFunction g2_line(double t, double alpha) {
  LineFunction g;
  g.f = [t, alpha](double z) { return g2_eval(z, t, alpha); };
  g.lo = 0.0;
  g.hi = 1.0;
  g.kinks = {0.5};
  if (t > 0 && std::sqrt(t) < 0.5) g.kinks.push_back(std::sqrt(t));
  return g;
}

namespace {

// int_0^1 h(z) g2(z, t) dz for h smooth away from z = 0
double against_g2(const std::function<double(double)>& h, double t, const CounterexampleConfig& c) {
  const auto f = [&](double z) { return h(z) * g2_eval(z, t, c.alpha); };
  return graded_integral(f, 0.0, 0.5, true, false, c.resolution) +
         graded_integral(f, 0.5, 1.0, false, false, 2 * c.resolution);
}

}  // namespace

double I3_eval(double x2, double t, const CounterexampleConfig& c) {
  if (!(t > 0)) return 0.0;
  if (!(x2 > 0)) throw InvalidInput("I3_eval needs x2 > 0");
  return against_g2([x2](double z) { return z / (z * z + x2 * x2); }, t, c);
}

double gaussian_averaged_hilbert(double tau, double s, const CounterexampleConfig& c) {
  if (!(s > 0) || !(tau > 0)) return 0.0;
  const double h = 2.0 * std::sqrt(tau);
  return -2.0 / (kPi * h) * against_g2([h](double w) { return dawson(w / h); }, s, c);
}

double I2_eval(double x2, double t, const CounterexampleConfig& c) {
  if (!(t > 0)) return 0.0;
  if (!(x2 > 0)) throw InvalidInput("I2_eval needs x2 > 0");
  const double z0 = x2 / (2.0 * std::sqrt(t));
  const double z1 = std::max(z0, 0.0) + 6.5;
  const auto f = [&](double z) {
    const double tau = x2 * x2 / (4.0 * z * z);
    return std::exp(-z * z) * gaussian_averaged_hilbert(tau, t - tau, c);
  };
  return graded_integral(f, z0, z1, true, false, c.resolution) / std::sqrt(kPi);
}

QuotientSweep holder_quotient_sweep(const CounterexampleConfig& c) {
  c.validate();
  return holder_quotient_sweep(c, c.t_grid());
}

QuotientSweep holder_quotient_sweep(const CounterexampleConfig& c,
                                    const std::vector<double>& t_list) {
  QuotientSweep out;
  out.rows.resize(t_list.size());
  parallel_for(t_list.size(), c.workers, [&](std::size_t k) {
    QuotientRow& r = out.rows[k];
    r.t = t_list[k];
    r.I2 = I2_eval(r.t, r.t, c);
    r.I3 = I3_eval(r.t, r.t, c);
    r.Q = std::abs(r.I2 + r.I3) / std::pow(2.0 * r.t, 0.5 * c.alpha);
  });
  std::vector<double> x, y;
  for (const QuotientRow& r : out.rows) {
    x.push_back(std::log(1.0 / r.t));
    y.push_back(r.Q);
  }
  if (x.size() >= 2) out.fit = fit_line(x, y);
  return out;
}

double DiniGrowth::growth() const {
  if (levels.empty() || levels.front().mixed <= 0) return 0.0;
  return levels.back().mixed / levels.front().mixed;
}

double DiniGrowth::parabolic_drift() const {
  double d = 0;
  const std::size_t n = levels.size();
  for (std::size_t k = n >= 3 ? n - 2 : 1; k < n; ++k)
    d = std::max(d, std::abs(levels[k].parabolic - levels[k - 1].parabolic) /
                        levels[k - 1].parabolic);
  return d;
}

namespace {

std::vector<double> geometric(double lo, double hi, int per_decade) {
  const int n = std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
  v.back() = hi;
  return v;
}

}  // namespace

SampledField level_grid_trace(const std::function<double(double, double)>& g, int level,
                              int per_decade) {
  const double x_min = 0.1 * std::pow(100.0, -level);
  const std::vector<double> xs = geometric(x_min, 1.0, per_decade);
  std::vector<Vec2> pts;
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) pts.push_back({-*it, 0.0});
  pts.push_back({0.0, 0.0});
  for (double x : xs) pts.push_back({x, 0.0});
  std::vector<double> ts{0.0};
  for (double t : geometric(x_min * x_min, 1.0, per_decade)) ts.push_back(t);
  return SampledField::from_function(pts, ts, 1,
                                     [&](Vec2 p, double t, double* v) { v[0] = g(p.x, t); });
}

DiniGrowth dini_divergence_check(const CounterexampleConfig& c, const DiniModulus& eta,
                                 const std::function<double(double, double)>& g) {
  c.validate();
  const auto datum = g ? g : [a = c.alpha](double x, double t) { return g2_eval(x, t, a); };
  DiniGrowth out;
  for (int l = 0; l < c.levels; ++l) {
    const SampledField tr = level_grid_trace(datum, l, c.per_decade);
    DiniLevel d;
    d.level = l;
    d.x_min = 0.1 * std::pow(100.0, -l);
    d.n_points = tr.n_points();
    d.n_times = tr.n_times();
    d.mixed = mixed_boundary_seminorm_scan(tr, c.alpha, eta, ScanMode::Exact, c.workers).value;
    // largest quotient rounding alone can produce on this grid
    double gmax = 0, dt = std::numeric_limits<double>::infinity(),
           dx = std::numeric_limits<double>::infinity();
    for (double v : tr.values()) gmax = std::max(gmax, std::abs(v));
    for (std::size_t k = 1; k < tr.n_times(); ++k) dt = std::min(dt, tr.times()[k] - tr.times()[k - 1]);
    for (std::size_t k = 1; k < tr.n_points(); ++k)
      dx = std::min(dx, tr.points()[k].x - tr.points()[k - 1].x);
    const double floor = 16 * std::numeric_limits<double>::epsilon() * gmax /
                         (std::pow(dt, 0.5 * c.alpha) * eta(dx));
    if (d.mixed <= floor) d.mixed = 0.0;
    d.parabolic = parabolic_norm(tr, c.alpha, ScanMode::Exact, c.workers).total();
    out.levels.push_back(d);
  }
  out.strictly_increasing = true;
  for (std::size_t k = 1; k < out.levels.size(); ++k)
    if (!(out.levels[k].mixed > out.levels[k - 1].mixed)) out.strictly_increasing = false;
  const std::size_t n = out.levels.size();
  out.diverges = out.strictly_increasing &&
                 out.levels[n - 1].mixed > 1.01 * out.levels[n - 2].mixed;
  return out;
}

double i2_fan_constant(const CounterexampleConfig& c) {
  std::vector<std::pair<double, double>> fan;
  for (double x2 : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1})
    for (double t : {x2 * x2, std::sqrt(x2 * x2 * 0.1), 0.1})
      fan.emplace_back(x2, std::max(t, x2 * x2));
  std::vector<double> q(fan.size());
  parallel_for(fan.size(), c.workers, [&](std::size_t k) {
    const auto [x2, t] = fan[k];
    q[k] = std::abs(I2_eval(x2, t, c)) / (std::pow(x2, c.alpha) * std::abs(std::log(x2)));
  });
  return *std::max_element(q.begin(), q.end());
}

double i3_lower_constant(const CounterexampleConfig& c) {
  c.validate();
  double m = std::numeric_limits<double>::infinity();
  for (double t : c.t_grid()) {
    const double h = std::pow(t, 0.5 * c.alpha);
    const double shape = h * std::abs(std::log(t)) - h - std::pow(t, c.alpha);
    if (shape > 0) m = std::min(m, I3_eval(t, t, c) / shape);
  }
  return m;
}

double hilbert_decay_constant(double t, const CounterexampleConfig& c) {
  const LineFunction g = g2_line(t, c.alpha);
  double m = 0;
  for (int k = 0; k <= 20; ++k) {
    const double y = std::pow(100.0, k / 20.0);
    m = std::max({m, y * std::abs(hilbert_transform(g, y, c.resolution)),
                  y * std::abs(hilbert_transform(g, -y, c.resolution))});
  }
  return m;
}

}  // namespace dstokes

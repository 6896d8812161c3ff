#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "dstokes/common.hpp"
#include "dstokes/holder_norms.hpp"

namespace dstokes {

struct CounterexampleConfig {
  double alpha = 0.5;
  double t_min = 1e-4;
  double t_max = 1e-1;
  int n_t = 13;            // geometric sweep points
  int resolution = 1;      // Gauss panels per octave of the graded rules
  int levels = 4;          // Dini refinement levels
  int per_decade = 6;      // grid points per decade on level grids
  std::string eta = "log2";
  int workers = 0;

  /// Throws InvalidInput on alpha outside (0,1), t_min <= 0, t_min >= t_max,
  /// n_t < 3, resolution < 1, levels < 2, per_decade < 2.
  void validate() const;
  std::vector<double> t_grid() const;
};

/// Plateau bump: 1 on |x| <= 1/2, 0 on |x| >= 1, exp-based smooth step between.
double plateau_bump(double x);

/// Boundary datum g2(x1, t) of the flat-boundary counterexample.
double g2_eval(double x1, double t, double alpha);

/// Dawson function F(x) = exp(-x^2) int_0^x exp(s^2) ds.
double dawson(double x);

/// Composite Gauss quadrature over [a,b] with panels refined geometrically
/// towards the flagged ends: `per_octave` panels per halving, down to
/// (b - a) * 2^-depth.
double graded_integral(const std::function<double(double)>& f, double a, double b,
                       bool grade_a, bool grade_b, int per_octave = 1, int depth = 40);

/// Scalar function on the line with support [lo, hi] (may be infinite) and
/// points where it is not smooth.
struct LineFunction {
  std::function<double(double)> f;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::vector<double> kinks;
};

/// p.v. (1/pi) int g(z) / (y - z) dz: the symmetric window around y is
/// folded onto (g(y-r) - g(y+r)) / r, the rest is integrated directly
/// (exp-sinh on infinite tails).
double hilbert_transform(const LineFunction& g, double y, int per_octave = 1);

/// g2(., t) as a LineFunction.
LineFunction g2_line(double t, double alpha);

/// int z / (z^2 + x2^2) g2(z, t) dz.
double I3_eval(double x2, double t, const CounterexampleConfig& c);

/// Gaussian average (1/sqrt(pi)) int exp(-xi^2) Hg2(2 sqrt(tau) xi, s) dxi,
/// computed as -(1/(pi sqrt(tau))) int g2(w, s) F(w / (2 sqrt(tau))) dw.
double gaussian_averaged_hilbert(double tau, double s, const CounterexampleConfig& c);

/// -int_0^t int D_x2 Gamma(-y1, x2, t-s) Hg2(y1, s) dy1 ds, rewritten with
/// tau = x2^2 / (4 zeta^2) as (1/sqrt(pi)) int_{zeta0}^inf exp(-zeta^2) A(tau) dzeta.
double I2_eval(double x2, double t, const CounterexampleConfig& c);

struct QuotientRow {
  double t = 0, I2 = 0, I3 = 0, Q = 0;
};

struct QuotientSweep {
  std::vector<QuotientRow> rows;
  LineFit fit;  // Q against ln(1/t)
};

/// Q(t) = |I2(t,t) + I3(t,t)| / (2t)^{alpha/2} on the configured t grid.
QuotientSweep holder_quotient_sweep(const CounterexampleConfig& c);
QuotientSweep holder_quotient_sweep(const CounterexampleConfig& c,
                                    const std::vector<double>& t_list);

struct DiniLevel {
  int level = 0;
  double x_min = 0;
  std::size_t n_points = 0, n_times = 0;
  double mixed = 0;      // mixed boundary seminorm with eta, 0 below the rounding floor
  double parabolic = 0;  // parabolic norm total
};

struct DiniGrowth {
  std::vector<DiniLevel> levels;
  bool strictly_increasing = false;
  bool diverges = false;  // strictly increasing and > 1% growth at the finest pair
  double growth() const;  // final / initial mixed seminorm
  double parabolic_drift() const;  // max relative change over the last two steps
};

/// Flat-boundary trace of g on level grids: x1 in +-(geometric from x_min
/// to 1) with 0, t geometric from x_min^2 to 1 with 0; x_min = 0.1 * 100^-level.
SampledField level_grid_trace(const std::function<double(double, double)>& g, int level,
                              int per_decade);

DiniGrowth dini_divergence_check(const CounterexampleConfig& c, const DiniModulus& eta,
                                 const std::function<double(double, double)>& g = {});

/// max |I2(x2, t)| / (x2^alpha |ln x2|) over the fan x2 in [1e-3, 1e-1], x2^2 <= t <= 0.1.
double i2_fan_constant(const CounterexampleConfig& c);

/// min I3(t, t) / (t^{a/2}|ln t| - t^{a/2} - t^a) over the sweep grid.
double i3_lower_constant(const CounterexampleConfig& c);

/// max |y| |Hg2(y, t)| over 1 <= |y| <= 100 on a log grid.
double hilbert_decay_constant(double t, const CounterexampleConfig& c);

}  // namespace dstokes

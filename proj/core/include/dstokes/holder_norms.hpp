#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dstokes/field.hpp"

namespace dstokes {

/// Increasing modulus of continuity eta on (0, r0].
struct DiniModulus {
  std::function<double(double)> eval;
  /// Optional s -> eta(exp(s)); lets the Dini integral probe scales below
  /// the double range of r.
  std::function<double(double)> eval_log;
  double r0 = 1.0;
  std::string name = "custom";
  /// Smallest tabulated abscissa; below it eta is clamped (tabulated only).
  double r_min_tabulated = 0.0;

  double operator()(double r) const;
  double at_log(double s) const;

  /// Checks monotonicity on a log grid and eta -> 0 at the smallest sample.
  void validate() const;

  static DiniModulus power(double beta, double r0 = 1.0);
  /// 1 / (1 + |ln r|)^p
  static DiniModulus log_power(double p, double r0 = 1.0);
  /// Piecewise linear in ln r, clamped to the first value below r.front().
  static DiniModulus tabulated(std::vector<double> r, std::vector<double> eta);
  /// Presets by name: "log2" (p=2), "log1" (p=1), "power:<beta>".
  static DiniModulus preset(const std::string& name);
};

enum class ScanMode { Exact, Screened };

/// Sample indices of a maximizing pair: points (i,j) and times (s,t).
struct AttainingPair {
  long i = -1, j = -1, s = -1, t = -1;
};

struct SeminormValue {
  double value = 0.0;
  AttainingPair pair;
};

struct HolderReport {
  double sup_norm = 0.0;
  double space_seminorm = 0.0;
  double time_seminorm = 0.0;
  std::optional<double> mixed_seminorm;
  AttainingPair space_pair;
  AttainingPair time_pair;
  AttainingPair mixed_pair;
  bool eta_clamped = false;
  double total() const { return sup_norm + space_seminorm + time_seminorm; }
};

SeminormValue space_seminorm_scan(const SampledField& f, double alpha,
                                  ScanMode mode = ScanMode::Exact,
                                  int workers = 0);
double space_seminorm(const SampledField& f, double alpha,
                      ScanMode mode = ScanMode::Exact);

SeminormValue time_seminorm_scan(const SampledField& f, double half_alpha,
                                 ScanMode mode = ScanMode::Exact,
                                 int workers = 0);
double time_seminorm(const SampledField& f, double half_alpha,
                     ScanMode mode = ScanMode::Exact);

/// sup + space seminorm (alpha) + time seminorm (alpha/2).
HolderReport parabolic_norm(const SampledField& f, double alpha,
                            ScanMode mode = ScanMode::Exact, int workers = 0);

SeminormValue dini_seminorm_scan(const SampledField& f, double alpha,
                                 const DiniModulus& eta,
                                 ScanMode mode = ScanMode::Exact,
                                 int workers = 0);
double dini_seminorm(const SampledField& f, double alpha,
                     const DiniModulus& eta, ScanMode mode = ScanMode::Exact);

/// sup |f(P,t)-f(P,s)-f(Q,t)+f(Q,s)| / (|t-s|^{alpha/2} eta(|P-Q|)),
/// chordal distance.
SeminormValue mixed_boundary_seminorm_scan(const SampledField& trace,
                                           double alpha,
                                           const DiniModulus& eta,
                                           ScanMode mode = ScanMode::Exact,
                                           int workers = 0);
double mixed_boundary_seminorm(const SampledField& trace, double alpha,
                               const DiniModulus& eta,
                               ScanMode mode = ScanMode::Exact);

/// int_0^{r0} eta(r)/r dr. Throws DiniViolation when the integral does not
/// settle as the lower limit is pushed to zero.
double dini_integral(const DiniModulus& eta, double r0);

}  // namespace dstokes

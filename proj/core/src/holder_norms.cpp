#include "dstokes/holder_norms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace dstokes {

// ---- DiniModulus -------------------------------------------------------------

double DiniModulus::operator()(double r) const {
  if (!eval) throw InvalidInput("modulus has no evaluator");
  return eval(r);
}

double DiniModulus::at_log(double s) const {
  if (eval_log) return eval_log(s);
  return (*this)(std::exp(s));
}

void DiniModulus::validate() const {
  if (!eval) throw InvalidInput("modulus has no evaluator");
  if (!(r0 > 0)) throw InvalidInput("modulus r0 must be positive");
  const auto grid = geomspace(r0 * 1e-12, r0, 241);
  double prev = -1.0;
  for (double r : grid) {
    const double v = (*this)(r);
    if (!std::isfinite(v) || v < 0)
      throw InvalidInput("modulus must be finite and non-negative");
    if (v == 0.0) throw DegenerateModulus("modulus vanishes at r > 0");
    if (v < prev * (1.0 - 1e-14))
      throw InvalidInput("modulus is not nondecreasing on the sample grid");
    prev = v;
  }
  if (r_min_tabulated == 0.0 && !((*this)(grid.front()) < 0.5 * (*this)(r0)))
    throw InvalidInput("modulus does not decay towards r = 0");
}

DiniModulus DiniModulus::power(double beta, double r0) {
  if (!(beta > 0)) throw InvalidInput("power modulus needs beta > 0");
  DiniModulus m;
  m.eval = [beta](double r) { return std::pow(r, beta); };
  m.eval_log = [beta](double s) { return std::exp(beta * s); };
  m.r0 = r0;
  std::ostringstream os;
  os << "power:" << beta;
  m.name = os.str();
  return m;
}

DiniModulus DiniModulus::log_power(double p, double r0) {
  if (!(p > 0)) throw InvalidInput("log modulus needs p > 0");
  if (r0 > 1.0) throw InvalidInput("log modulus is increasing only on (0,1]");
  DiniModulus m;
  m.eval = [p](double r) {
    return std::pow(1.0 + std::abs(std::log(r)), -p);
  };
  m.eval_log = [p](double s) { return std::pow(1.0 + std::abs(s), -p); };
  m.r0 = r0;
  std::ostringstream os;
  os << "log:" << p;
  m.name = os.str();
  return m;
}

DiniModulus DiniModulus::tabulated(std::vector<double> r,
                                   std::vector<double> eta) {
  if (r.size() != eta.size() || r.size() < 2)
    throw InvalidInput("tabulated modulus needs >= 2 matching samples");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0)) throw InvalidInput("tabulated abscissae must be > 0");
    if (i > 0 && !(r[i] > r[i - 1]))
      throw InvalidInput("tabulated abscissae must increase");
    if (eta[i] == 0.0)
      throw DegenerateModulus("tabulated modulus vanishes at r > 0");
  }
  DiniModulus m;
  std::vector<double> lr(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) lr[i] = std::log(r[i]);
  m.eval = [lr, eta](double x) {
    if (x <= 0) return eta.front();
    const double l = std::log(x);
    if (l <= lr.front()) return eta.front();
    if (l >= lr.back()) return eta.back();
    const auto it = std::upper_bound(lr.begin(), lr.end(), l);
    const std::size_t k = static_cast<std::size_t>(it - lr.begin());
    const double w = (l - lr[k - 1]) / (lr[k] - lr[k - 1]);
    return (1 - w) * eta[k - 1] + w * eta[k];
  };
  m.r0 = r.back();
  m.r_min_tabulated = r.front();
  m.name = "tabulated";
  return m;
}

DiniModulus DiniModulus::preset(const std::string& name) {
  if (name == "log2") return log_power(2.0);
  if (name == "log1") return log_power(1.0);
  if (name.rfind("power:", 0) == 0) return power(std::stod(name.substr(6)));
  throw InvalidInput("unknown modulus preset '" + name + "'");
}

// ---- scanning helpers ----------------------------------------------------------

namespace {

bool key_less(const AttainingPair& a, const AttainingPair& b) {
  return std::tie(a.i, a.j, a.s, a.t) < std::tie(b.i, b.j, b.s, b.t);
}

// Larger value wins; equal values resolved by lexicographic index order.
void merge(SeminormValue& best, const SeminormValue& cand) {
  if (cand.pair.i < 0) return;
  if (best.pair.i < 0 || cand.value > best.value ||
      (cand.value == best.value && key_less(cand.pair, best.pair)))
    best = cand;
}

SeminormValue reduce(const std::vector<SeminormValue>& parts) {
  SeminormValue best;
  for (const auto& p : parts) merge(best, p);
  if (best.pair.i < 0) best.value = 0.0;
  return best;
}

bool is_dyadic(std::size_t d) { return d != 0 && (d & (d - 1)) == 0; }

double diff_norm(const double* a, const double* b, int nc) {
  if (nc == 1) return std::abs(a[0] - b[0]);
  double s = 0;
  for (int c = 0; c < nc; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(s);
}

void require_points(const SampledField& f) {
  if (f.n_points() < 2) throw InvalidInput("seminorm needs >= 2 points");
}
void require_times(const SampledField& f) {
  if (f.n_times() < 2) throw InvalidInput("seminorm needs >= 2 times");
}

// Spatial scan shared by the Holder and Dini seminorms: weight(r) is the
// denominator as a function of distance.
SeminormValue spatial_scan(const SampledField& f,
                           const std::function<double(double)>& weight,
                           ScanMode mode, int workers) {
  require_points(f);
  const std::size_t np = f.n_points(), nt = f.n_times();
  const int nc = f.components();
  std::vector<SeminormValue> parts(np);
  parallel_for(np, workers, [&](std::size_t i) {
    SeminormValue best;
    for (std::size_t j = i + 1; j < np; ++j) {
      if (mode == ScanMode::Screened && !is_dyadic(j - i)) continue;
      const double r = norm(f.points()[i] - f.points()[j]);
      if (r == 0.0) continue;
      const double inv = 1.0 / weight(r);
      for (std::size_t t = 0; t < nt; ++t) {
        const double q = diff_norm(f.sample(i, t), f.sample(j, t), nc) * inv;
        if (best.pair.i < 0 || q > best.value) {
          best.value = q;
          best.pair = {static_cast<long>(i), static_cast<long>(j),
                       static_cast<long>(t), static_cast<long>(t)};
        }
      }
    }
    parts[i] = best;
  });
  return reduce(parts);
}

}  // namespace

// ---- seminorms -------------------------------------------------------------

SeminormValue space_seminorm_scan(const SampledField& f, double alpha,
                                  ScanMode mode, int workers) {
  if (!(alpha > 0 && alpha < 1))
    throw InvalidInput("space seminorm needs alpha in (0,1)");
  return spatial_scan(
      f, [alpha](double r) { return std::pow(r, alpha); }, mode, workers);
}

double space_seminorm(const SampledField& f, double alpha, ScanMode mode) {
  return space_seminorm_scan(f, alpha, mode).value;
}

SeminormValue time_seminorm_scan(const SampledField& f, double half_alpha,
                                 ScanMode mode, int workers) {
  if (!(half_alpha > 0 && half_alpha <= 0.5))
    throw InvalidInput("time seminorm needs alpha/2 in (0,0.5]");
  require_times(f);
  const std::size_t np = f.n_points(), nt = f.n_times();
  const int nc = f.components();
  const auto& ts = f.times();
  std::vector<double> inv(nt * nt, 0.0);
  for (std::size_t s = 0; s < nt; ++s)
    for (std::size_t t = s + 1; t < nt; ++t)
      inv[s * nt + t] = std::pow(ts[t] - ts[s], -half_alpha);
  std::vector<SeminormValue> parts(np);
  parallel_for(np, workers, [&](std::size_t p) {
    SeminormValue best;
    for (std::size_t s = 0; s < nt; ++s)
      for (std::size_t t = s + 1; t < nt; ++t) {
        if (mode == ScanMode::Screened && !is_dyadic(t - s)) continue;
        const double q =
            diff_norm(f.sample(p, t), f.sample(p, s), nc) * inv[s * nt + t];
        if (best.pair.i < 0 || q > best.value) {
          best.value = q;
          best.pair = {static_cast<long>(p), static_cast<long>(p),
                       static_cast<long>(s), static_cast<long>(t)};
        }
      }
    parts[p] = best;
  });
  return reduce(parts);
}

double time_seminorm(const SampledField& f, double half_alpha, ScanMode mode) {
  return time_seminorm_scan(f, half_alpha, mode).value;
}

HolderReport parabolic_norm(const SampledField& f, double alpha,
                            ScanMode mode, int workers) {
  f.validate();
  HolderReport r;
  r.sup_norm = sup_norm(f);
  const auto sp = space_seminorm_scan(f, alpha, mode, workers);
  const auto tm = time_seminorm_scan(f, 0.5 * alpha, mode, workers);
  r.space_seminorm = sp.value;
  r.space_pair = sp.pair;
  r.time_seminorm = tm.value;
  r.time_pair = tm.pair;
  return r;
}

SeminormValue dini_seminorm_scan(const SampledField& f, double alpha,
                                 const DiniModulus& eta, ScanMode mode,
                                 int workers) {
  if (!(alpha >= 0 && alpha < 1))
    throw InvalidInput("Dini seminorm needs alpha in [0,1)");
  return spatial_scan(
      f,
      [&](double r) {
        const double e = eta(r);
        if (!(e > 0)) throw DegenerateModulus("modulus vanishes at r > 0");
        return std::pow(r, alpha) * e;
      },
      mode, workers);
}

double dini_seminorm(const SampledField& f, double alpha,
                     const DiniModulus& eta, ScanMode mode) {
  return dini_seminorm_scan(f, alpha, eta, mode).value;
}

SeminormValue mixed_boundary_seminorm_scan(const SampledField& f, double alpha,
                                           const DiniModulus& eta,
                                           ScanMode mode, int workers) {
  if (!(alpha > 0 && alpha < 1))
    throw InvalidInput("mixed seminorm needs alpha in (0,1)");
  require_points(f);
  require_times(f);
  const std::size_t np = f.n_points(), nt = f.n_times();
  const int nc = f.components();
  const auto& ts = f.times();
  std::vector<double> inv(nt * nt, 0.0);
  for (std::size_t s = 0; s < nt; ++s)
    for (std::size_t t = s + 1; t < nt; ++t)
      inv[s * nt + t] = std::pow(ts[t] - ts[s], -0.5 * alpha);

  std::vector<SeminormValue> parts(np);
  parallel_for(np, workers, [&](std::size_t i) {
    SeminormValue best;
    std::vector<double> d(nt * static_cast<std::size_t>(nc));
    for (std::size_t j = i + 1; j < np; ++j) {
      if (mode == ScanMode::Screened && !is_dyadic(j - i)) continue;
      const double r = norm(f.points()[i] - f.points()[j]);
      if (r == 0.0) continue;
      const double e = eta(r);
      if (!(e > 0)) throw DegenerateModulus("modulus vanishes at r > 0");
      for (std::size_t t = 0; t < nt; ++t)
        for (int c = 0; c < nc; ++c)
          d[t * nc + c] = f.at(i, t, c) - f.at(j, t, c);
      // max cross difference over time pairs, then divide by eta
      double m = -1.0;
      std::size_t ms = 0, mt = 0;
      for (std::size_t s = 0; s < nt; ++s) {
        const double* row = &inv[s * nt];
        for (std::size_t t = s + 1; t < nt; ++t) {
          if (mode == ScanMode::Screened && !is_dyadic(t - s)) continue;
          double q;
          if (nc == 1) {
            q = std::abs(d[t] - d[s]) * row[t];
          } else {
            q = diff_norm(&d[t * nc], &d[s * nc], nc) * row[t];
          }
          if (q > m) {
            m = q;
            ms = s;
            mt = t;
          }
        }
      }
      if (m < 0) continue;
      const double q = m / e;
      if (best.pair.i < 0 || q > best.value) {
        best.value = q;
        best.pair = {static_cast<long>(i), static_cast<long>(j),
                     static_cast<long>(ms), static_cast<long>(mt)};
      }
    }
    parts[i] = best;
  });
  return reduce(parts);
}

double mixed_boundary_seminorm(const SampledField& trace, double alpha,
                               const DiniModulus& eta, ScanMode mode) {
  return mixed_boundary_seminorm_scan(trace, alpha, eta, mode).value;
}

// ---- Dini integral ----------------------------------------------------------

double dini_integral(const DiniModulus& eta, double r0) {
  if (!(r0 > 0) || r0 > eta.r0 * (1 + 1e-12))
    throw InvalidInput("dini_integral needs 0 < r0 <= eta.r0");
  // Work in s = ln r. The depth d = ln r0 - s is doubled each round; each new
  // slab [d, 2d] is integrated in u = ln d, where the integrand stays smooth.
  const double s_hi = std::log(r0);
  const QuadRule g = gauss_legendre(24);
  double total = 0;
  {
    const QuadRule first = gauss_legendre(24, s_hi - 1.0, s_hi);
    for (std::size_t k = 0; k < first.x.size(); ++k)
      total += first.w[k] * eta.at_log(first.x[k]);
  }
  std::vector<double> partial{total};
  double depth = 1.0;
  for (int round = 0; round < 64; ++round) {
    const double u0 = std::log(depth), u1 = u0 + std::log(2.0);
    double inc = 0;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      const double u = u0 + 0.5 * (u1 - u0) * (g.x[k] + 1.0);
      const double d = std::exp(u);
      inc += 0.5 * (u1 - u0) * g.w[k] * eta.at_log(s_hi - d) * d;
    }
    total += inc;
    depth *= 2.0;
    partial.push_back(total);
    if (!std::isfinite(total)) break;
    if (std::abs(inc) <= 1e-6 * std::abs(total)) return total;
  }
  throw DiniViolation("modulus is not Dini integrable (partial sums grow)",
                      partial);
}

}  // namespace dstokes

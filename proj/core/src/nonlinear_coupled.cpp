#include "dstokes/nonlinear_coupled.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "dstokes/helmholtz.hpp"
#include "dstokes/holder_norms.hpp"

namespace dstokes {

// ---- state ----------------------------------------------------------------

StateTriple StateTriple::zero(int n, double time) {
  StateTriple s;
  s.n = n;
  s.time = time;
  const std::size_t c = static_cast<std::size_t>(n) * n, f = static_cast<std::size_t>(n + 1) * n;
  s.rho.assign(c, 0.0);
  s.theta.assign(c, 0.0);
  s.ux.assign(f, 0.0);
  s.uy.assign(f, 0.0);
  return s;
}

Vec2 StateTriple::velocity_at_cell(int i, int j) const {
  return {0.5 * (ux[j * (n + 1) + i] + ux[j * (n + 1) + i + 1]),
          0.5 * (uy[j * n + i] + uy[(j + 1) * n + i])};
}

double StateTriple::max_divergence() const {
  double m = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      m = std::max(m, std::abs(ux[j * (n + 1) + i + 1] - ux[j * (n + 1) + i] + uy[(j + 1) * n + i] -
                               uy[j * n + i]) *
                          n);
  return m;
}

bool StateTriple::finite() const {
  for (const auto* v : {&rho, &theta, &ux, &uy})
    for (double x : *v)
      if (!std::isfinite(x)) return false;
  return true;
}

double StateTriple::mass() const {
  double s = 0;
  for (double r : rho) s += r;
  return s / (static_cast<double>(n) * n);
}

// ---- spectral solvers on the square ---------------------------------------

namespace {

double eig(int k, int n) {
  const double s = std::sin(kPi * k / (2.0 * n));
  return 4.0 * n * n * s * s;
}

class R2R {
 public:
  R2R(int n0, int n1, fftw_r2r_kind k0, fftw_r2r_kind k1) {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    std::vector<double> a(static_cast<std::size_t>(n0) * n1), b(a.size());
    p_ = fftw_plan_r2r_2d(n0, n1, a.data(), b.data(), k0, k1, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~R2R() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(p_);
  }
  R2R(const R2R&) = delete;
  R2R& operator=(const R2R&) = delete;
  void operator()(std::vector<double>& in, std::vector<double>& out) const {
    fftw_execute_r2r(p_, in.data(), out.data());
  }

 private:
  fftw_plan p_;
};

// (I - dt Lap) solves with Neumann (cells) and Dirichlet (staggered velocity)
// conditions, and the Neumann Poisson solve of the projection.
class SquareSolver {
 public:
  explicit SquareSolver(int n)
      : n_(n),
        cf_(n, n, FFTW_REDFT10, FFTW_REDFT10),
        ci_(n, n, FFTW_REDFT01, FFTW_REDFT01),
        xf_(n, n - 1, FFTW_RODFT10, FFTW_RODFT00),
        xi_(n, n - 1, FFTW_RODFT01, FFTW_RODFT00),
        yf_(n - 1, n, FFTW_RODFT00, FFTW_RODFT10),
        yi_(n - 1, n, FFTW_RODFT00, FFTW_RODFT01) {}

  void heat(std::vector<double>& v, double dt) {
    w_.resize(v.size());
    cf_(v, w_);
    const double scale = 1.0 / (4.0 * n_ * n_);
    for (int l = 0; l < n_; ++l)
      for (int k = 0; k < n_; ++k)
        w_[l * n_ + k] *= scale / (1.0 + dt * (eig(k, n_) + eig(l, n_)));
    ci_(w_, v);
  }

  // Lap phi = v (Neumann), zero-mean phi
  void poisson(std::vector<double>& v) {
    w_.resize(v.size());
    cf_(v, w_);
    const double scale = 1.0 / (4.0 * n_ * n_);
    for (int l = 0; l < n_; ++l)
      for (int k = 0; k < n_; ++k)
        w_[l * n_ + k] *= (k == 0 && l == 0) ? 0.0 : -scale / (eig(k, n_) + eig(l, n_));
    ci_(w_, v);
  }

  // interior x-faces, layout j*(n-1) + (i-1)
  void velocity_x(std::vector<double>& v, double dt) {
    w_.resize(v.size());
    xf_(v, w_);
    const double scale = 1.0 / (4.0 * n_ * n_);
    for (int l = 0; l < n_; ++l)
      for (int k = 0; k < n_ - 1; ++k)
        w_[l * (n_ - 1) + k] *= scale / (1.0 + dt * (eig(k + 1, n_) + eig(l + 1, n_)));
    xi_(w_, v);
  }

  // interior y-faces, layout (j-1)*n + i
  void velocity_y(std::vector<double>& v, double dt) {
    w_.resize(v.size());
    yf_(v, w_);
    const double scale = 1.0 / (4.0 * n_ * n_);
    for (int l = 0; l < n_ - 1; ++l)
      for (int k = 0; k < n_; ++k)
        w_[l * n_ + k] *= scale / (1.0 + dt * (eig(k + 1, n_) + eig(l + 1, n_)));
    yi_(w_, v);
  }

  // removes the discrete gradient part; boundary faces stay zero
  void project(StateTriple& s) {
    const int n = n_;
    std::vector<double> d(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        d[j * n + i] = (s.ux[j * (n + 1) + i + 1] - s.ux[j * (n + 1) + i] + s.uy[(j + 1) * n + i] -
                        s.uy[j * n + i]) *
                       n;
    poisson(d);
    for (int j = 0; j < n; ++j)
      for (int i = 1; i < n; ++i) s.ux[j * (n + 1) + i] -= (d[j * n + i] - d[j * n + i - 1]) * n;
    for (int j = 1; j < n; ++j)
      for (int i = 0; i < n; ++i) s.uy[j * n + i] -= (d[j * n + i] - d[(j - 1) * n + i]) * n;
  }

 private:
  int n_;
  R2R cf_, ci_, xf_, xi_, yf_, yi_;
  std::vector<double> w_;
};

struct Sources {
  std::vector<double> rho, theta, ux, uy;
};

// Picard sources evaluated on one lagged state.
Sources lagged_sources(const StateTriple& s, const NonlinearRHS& rhs) {
  const int n = s.n;
  const double h = s.h();
  const auto C = [n](int i, int j) { return static_cast<std::size_t>(j) * n + i; };
  const auto X = [n](int i, int j) { return static_cast<std::size_t>(j) * (n + 1) + i; };
  const auto Y = [n](int i, int j) { return static_cast<std::size_t>(j) * n + i; };
  const auto th = [&](int i, int j) {
    return s.theta[C(std::clamp(i, 0, n - 1), std::clamp(j, 0, n - 1))];
  };

  // central cell gradient of theta, reflection at walls
  std::vector<Vec2> g(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      g[C(i, j)] = {(th(i + 1, j) - th(i - 1, j)) / (2 * h), (th(i, j + 1) - th(i, j - 1)) / (2 * h)};

  Sources out;
  out.rho.assign(static_cast<std::size_t>(n) * n, 0.0);
  out.theta.assign(out.rho.size(), 0.0);
  out.ux.assign(static_cast<std::size_t>(n + 1) * n, 0.0);
  out.uy.assign(out.ux.size(), 0.0);

  // face fluxes u rho - F and face values of G
  std::vector<double> fx(out.ux.size(), 0.0), fy(out.uy.size(), 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 1; i < n; ++i) {
      const double u = s.ux[X(i, j)];
      const double rl = s.rho[C(i - 1, j)], rr = s.rho[C(i, j)];
      const Vec2 pos{i * h, (j + 0.5) * h};
      const double rf = 0.5 * (rl + rr), tf = 0.5 * (s.theta[C(i - 1, j)] + s.theta[C(i, j)]);
      const Vec2 gf{(s.theta[C(i, j)] - s.theta[C(i - 1, j)]) / h,
                    0.5 * (g[C(i - 1, j)].y + g[C(i, j)].y)};
      const Vec2 uf{u, 0.25 * (s.uy[Y(i - 1, j)] + s.uy[Y(i, j)] + s.uy[Y(i - 1, j + 1)] +
                               s.uy[Y(i, j + 1)])};
      fx[X(i, j)] = u * (u > 0 ? rl : rr) - (rhs.F ? rhs.F(pos, rf, tf, gf, uf).x : 0.0);
      if (rhs.G) out.ux[X(i, j)] = rhs.G(pos, rf, tf, gf, uf).x;
    }
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double u = s.uy[Y(i, j)];
      const double rl = s.rho[C(i, j - 1)], rr = s.rho[C(i, j)];
      const Vec2 pos{(i + 0.5) * h, j * h};
      const double rf = 0.5 * (rl + rr), tf = 0.5 * (s.theta[C(i, j - 1)] + s.theta[C(i, j)]);
      const Vec2 gf{0.5 * (g[C(i, j - 1)].x + g[C(i, j)].x),
                    (s.theta[C(i, j)] - s.theta[C(i, j - 1)]) / h};
      const Vec2 uf{0.25 * (s.ux[X(i, j - 1)] + s.ux[X(i + 1, j - 1)] + s.ux[X(i, j)] +
                            s.ux[X(i + 1, j)]),
                    u};
      fy[Y(i, j)] = u * (u > 0 ? rl : rr) - (rhs.F ? rhs.F(pos, rf, tf, gf, uf).y : 0.0);
      if (rhs.G) out.uy[Y(i, j)] = rhs.G(pos, rf, tf, gf, uf).y;
    }

  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      out.rho[C(i, j)] = -(fx[X(i + 1, j)] - fx[X(i, j)] + fy[Y(i, j + 1)] - fy[Y(i, j)]) / h;
      const Vec2 u = s.velocity_at_cell(i, j);
      const double t0 = th(i, j);
      const double dx = u.x > 0 ? t0 - th(i - 1, j) : th(i + 1, j) - t0;
      const double dy = u.y > 0 ? t0 - th(i, j - 1) : th(i, j + 1) - t0;
      double src = -(u.x * dx + u.y * dy) / h;
      if (rhs.f) src += rhs.f(s.cell(i, j), s.rho[C(i, j)], t0, g[C(i, j)], u);
      out.theta[C(i, j)] = src;
    }

  // -div(u (x) u): cell-centred normal products, corner cross products
  std::vector<double> Q(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i)
      Q[j * (n + 1) + i] = 0.25 * (s.ux[X(i, j - 1)] + s.ux[X(i, j)]) *
                           (s.uy[Y(i - 1, j)] + s.uy[Y(i, j)]);
  std::vector<double> P(out.rho.size()), R(out.rho.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 u = s.velocity_at_cell(i, j);
      P[C(i, j)] = u.x * u.x;
      R[C(i, j)] = u.y * u.y;
    }
  for (int j = 0; j < n; ++j)
    for (int i = 1; i < n; ++i)
      out.ux[X(i, j)] -= (P[C(i, j)] - P[C(i - 1, j)] + Q[(j + 1) * (n + 1) + i] -
                          Q[j * (n + 1) + i]) /
                         h;
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < n; ++i)
      out.uy[Y(i, j)] -= (Q[j * (n + 1) + i + 1] - Q[j * (n + 1) + i] + R[C(i, j)] -
                          R[C(i, j - 1)]) /
                         h;
  return out;
}

}  // namespace

// ---- data -------------------------------------------------------------------

StateTriple initial_state(const CoupledData& d, int n, double* u0_defect) {
  if (n < 4) throw InvalidInput("grid needs n >= 4");
  StateTriple s = StateTriple::zero(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (d.rho0) s.rho[j * n + i] = d.rho0(s.cell(i, j));
      if (d.theta0) s.theta[j * n + i] = d.theta0(s.cell(i, j));
    }
  if (d.u0) {
    for (int j = 0; j < n; ++j)
      for (int i = 1; i < n; ++i) s.ux[j * (n + 1) + i] = d.u0({i * s.h(), (j + 0.5) * s.h()}).x;
    for (int j = 1; j < n; ++j)
      for (int i = 0; i < n; ++i) s.uy[j * n + i] = d.u0({(i + 0.5) * s.h(), j * s.h()}).y;
    const StateTriple raw = s;
    SquareSolver(n).project(s);
    if (u0_defect) {
      double m = 0;
      for (std::size_t k = 0; k < s.ux.size(); ++k)
        m = std::max({m, std::abs(s.ux[k] - raw.ux[k]), std::abs(s.uy[k] - raw.uy[k])});
      *u0_defect = m;
    }
  } else if (u0_defect) {
    *u0_defect = 0;
  }
  if (!s.finite()) throw InvalidInput("initial data not finite");
  return s;
}

// ---- Picard step ------------------------------------------------------------

Trajectory picard_step(const Trajectory& prev, const NonlinearRHS& rhs, const CoupledOptions& opt,
                       bool linear_only) {
  if (prev.size() < 2) throw InvalidInput("trajectory needs at least two time levels");
  const int n = prev.front().n;
  SquareSolver solver(n);
  Trajectory next(prev.size());
  next[0] = prev[0];
  for (std::size_t k = 1; k < prev.size(); ++k) {
    const double dt = prev[k].time - prev[k - 1].time;
    if (!(dt > 0)) throw InvalidInput("trajectory times must increase");
    StateTriple s = next[k - 1];
    s.time = prev[k].time;
    Sources src;
    if (!linear_only) src = lagged_sources(prev[k], rhs);

    if (!opt.freeze_rho) {
      if (!linear_only)
        for (std::size_t c = 0; c < s.rho.size(); ++c) s.rho[c] += dt * src.rho[c];
      solver.heat(s.rho, dt);
    }
    if (!opt.freeze_theta) {
      if (!linear_only)
        for (std::size_t c = 0; c < s.theta.size(); ++c) s.theta[c] += dt * src.theta[c];
      solver.heat(s.theta, dt);
    }
    if (!opt.freeze_u) {
      std::vector<double> vx(static_cast<std::size_t>(n - 1) * n), vy(vx.size());
      for (int j = 0; j < n; ++j)
        for (int i = 1; i < n; ++i) {
          const std::size_t f = static_cast<std::size_t>(j) * (n + 1) + i;
          vx[j * (n - 1) + i - 1] = s.ux[f] + (linear_only ? 0.0 : dt * src.ux[f]);
        }
      for (int j = 1; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const std::size_t f = static_cast<std::size_t>(j) * n + i;
          vy[(j - 1) * n + i] = s.uy[f] + (linear_only ? 0.0 : dt * src.uy[f]);
        }
      solver.velocity_x(vx, dt);
      solver.velocity_y(vy, dt);
      for (int j = 0; j < n; ++j)
        for (int i = 1; i < n; ++i) s.ux[j * (n + 1) + i] = vx[j * (n - 1) + i - 1];
      for (int j = 1; j < n; ++j)
        for (int i = 0; i < n; ++i) s.uy[j * n + i] = vy[(j - 1) * n + i];
      solver.project(s);
    }
    next[k] = std::move(s);
  }
  return next;
}

// ---- norms ----------------------------------------------------------------------

SampledField trajectory_field(const Trajectory& tr, const std::string& what) {
  if (tr.empty()) throw InvalidInput("empty trajectory");
  const int n = tr.front().n;
  std::vector<Vec2> pts;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) pts.push_back(tr.front().cell(i, j));
  std::vector<double> ts;
  for (const StateTriple& s : tr) ts.push_back(s.time);
  const int comps = (what == "u" || what == "grad_theta") ? 2 : 1;
  if (comps == 1 && what != "rho" && what != "theta")
    throw InvalidInput("unknown trajectory component: " + what);
  SampledField f(pts, ts, comps);
  const double h = 1.0 / n;
  for (std::size_t t = 0; t < tr.size(); ++t) {
    const StateTriple& s = tr[t];
    const auto th = [&](int i, int j) {
      return s.theta[std::clamp(j, 0, n - 1) * n + std::clamp(i, 0, n - 1)];
    };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t p = static_cast<std::size_t>(j) * n + i;
        if (what == "rho") {
          f.at(p, t) = s.rho[p];
        } else if (what == "theta") {
          f.at(p, t) = s.theta[p];
        } else if (what == "u") {
          const Vec2 u = s.velocity_at_cell(i, j);
          f.at(p, t, 0) = u.x;
          f.at(p, t, 1) = u.y;
        } else {
          f.at(p, t, 0) = (th(i + 1, j) - th(i - 1, j)) / (2 * h);
          f.at(p, t, 1) = (th(i, j + 1) - th(i, j - 1)) / (2 * h);
        }
      }
  }
  return f;
}

double trajectory_norm(const Trajectory& tr, double alpha) {
  double s = 0;
  for (const char* w : {"rho", "theta", "grad_theta", "u"}) {
    const SampledField f = trajectory_field(tr, w);
    if (tr.size() > 1) {
      s += parabolic_norm(f, alpha, ScanMode::Screened).total();
      continue;
    }
    // a single time level: sup + space seminorm
    double m = 0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    s += m + space_seminorm_scan(f, alpha, ScanMode::Screened).value;
  }
  return s;
}

double trajectory_difference(const Trajectory& a, const Trajectory& b, double alpha) {
  if (a.size() != b.size()) throw InvalidInput("trajectory lengths differ");
  Trajectory d = a;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (auto [x, y] : {std::pair{&d[k].rho, &b[k].rho}, std::pair{&d[k].theta, &b[k].theta},
                        std::pair{&d[k].ux, &b[k].ux}, std::pair{&d[k].uy, &b[k].uy}})
      for (std::size_t c = 0; c < x->size(); ++c) (*x)[c] -= (*y)[c];
  return trajectory_norm(d, alpha);
}

double IterationReport::contraction() const {
  if (ratios.empty()) return 0.0;
  if (ratios.size() == 1) return ratios[0];
  double s = 0;
  for (std::size_t k = 1; k < ratios.size(); ++k) s += std::log(std::max(ratios[k], 1e-300));
  return std::exp(s / static_cast<double>(ratios.size() - 1));
}

namespace {

// differences above the noise floor of the final iterate
std::vector<double> resolved(const IterationReport& r) {
  std::vector<double> d;
  const double floor = r.norms.empty() ? 0.0 : 1e-12 * r.norms.back();
  for (double x : r.differences)
    if (x > floor) d.push_back(x);
  return d;
}

double max_quotient_deviation(const std::vector<double>& r) {
  double d = 0;
  for (std::size_t k = 1; k < r.size(); ++k) d = std::max(d, std::abs(r[k] / r[k - 1] - 1.0));
  return d;
}

}  // namespace

std::vector<double> IterationReport::two_step_ratios() const {
  const std::vector<double> d = resolved(*this);
  std::vector<double> r;
  for (std::size_t k = 1; k + 2 < d.size(); ++k) r.push_back(std::sqrt(d[k + 2] / d[k]));
  return r;
}

double IterationReport::ratio_quotient_deviation() const {
  return max_quotient_deviation(two_step_ratios());
}

double IterationReport::raw_ratio_quotient_deviation() const {
  const std::vector<double> d = resolved(*this);
  std::vector<double> r;
  for (std::size_t k = 2; k < d.size(); ++k) r.push_back(d[k] / d[k - 1]);
  return max_quotient_deviation(r);
}

// ---- driver ----------------------------------------------------------------------

CoupledSolution solve_coupled(const CoupledData& data, const NonlinearRHS& rhs, double T,
                              const CoupledOptions& opt) {
  if (!(T > 0)) throw InvalidInput("T must be positive");
  if (opt.steps < 1) throw InvalidInput("steps must be >= 1");
  if (!(opt.alpha > 0 && opt.alpha < 1)) throw InvalidInput("alpha must lie in (0,1)");
  CoupledSolution sol;
  IterationReport& rep = sol.report;
  const StateTriple init = initial_state(data, opt.n, &rep.u0_defect);
  rep.data_norm = trajectory_norm({init}, opt.alpha);

  for (double Tk = T;; Tk *= 0.5) {
    if (Tk < opt.min_T)
      throw StiffnessError("Picard iteration does not contract above the minimum horizon", Tk,
                           rep.ratios);
    rep.T_tried.push_back(Tk);
    rep.norms.clear();
    rep.differences.clear();
    rep.ratios.clear();
    rep.iterations = 0;

    Trajectory cur(static_cast<std::size_t>(opt.steps) + 1, init);
    for (int k = 0; k <= opt.steps; ++k) cur[k].time = Tk * k / opt.steps;
    cur = picard_step(cur, rhs, opt, true);
    rep.norms.push_back(trajectory_norm(cur, opt.alpha));

    bool ok = false;
    for (int m = 0; m < opt.max_iter; ++m) {
      Trajectory next = picard_step(cur, rhs, opt);
      if (!next.back().finite()) break;
      const double d = trajectory_difference(next, cur, opt.alpha);
      rep.differences.push_back(d);
      if (rep.differences.size() >= 2) {
        const double prev = rep.differences[rep.differences.size() - 2];
        rep.ratios.push_back(prev > 0 ? d / prev : 0.0);
      }
      rep.norms.push_back(trajectory_norm(next, opt.alpha));
      cur = std::move(next);
      ++rep.iterations;
      if (d <= opt.tol * std::max(1.0, rep.norms.back())) {
        ok = true;
        break;
      }
      const std::size_t nr = rep.ratios.size();
      if (nr >= 2 && rep.ratios[nr - 1] >= 1.0 && rep.ratios[nr - 2] >= 1.0) break;
    }
    if (ok) {
      rep.converged = true;
      rep.T = Tk;
      sol.trajectory = std::move(cur);
      return sol;
    }
  }
}

ConservationReport conservation_monitors(const Trajectory& tr) {
  ConservationReport r;
  if (tr.empty()) return r;
  const double m0 = tr.front().mass();
  const double c0 = *std::max_element(tr.front().theta.begin(), tr.front().theta.end());
  r.min_rho = std::numeric_limits<double>::infinity();
  for (const StateTriple& s : tr) {
    const double drift = m0 != 0 ? std::abs(s.mass() - m0) / std::abs(m0) : std::abs(s.mass());
    r.mass_drift.push_back(drift);
    if (s.time > 0) r.mass_drift_rate = std::max(r.mass_drift_rate, drift / s.time);
    const double cm = *std::max_element(s.theta.begin(), s.theta.end());
    r.max_principle_excess = std::max(r.max_principle_excess, cm - c0);
    r.max_divergence = std::max(r.max_divergence, s.max_divergence());
    r.min_rho = std::min(r.min_rho, *std::min_element(s.rho.begin(), s.rho.end()));
  }
  return r;
}

// ---- nonlinearities ------------------------------------------------------------

NonlinearRHS keller_segel_instance(const std::function<double(double)>& chi,
                                   const std::function<double(double)>& k,
                                   const std::function<Vec2(Vec2)>& grad_phi) {
  if (!chi || !k) throw InvalidInput("chi and k are required");
  if (std::abs(k(0.0)) > 1e-14) throw HypothesisViolation("k(0) must vanish");
  double pc = chi(0.0), pk = k(0.0);
  for (int s = 0; s <= 400; ++s) {
    const double c = 10.0 * s / 400;
    const double xc = chi(c), kc = k(c);
    if (xc < 0 || kc < 0) throw HypothesisViolation("chi and k must be non-negative");
    if (xc < pc - 1e-12 || kc < pk - 1e-12)
      throw HypothesisViolation("chi and k must be non-decreasing");
    pc = xc;
    pk = kc;
  }
  NonlinearRHS r;
  r.name = "keller-segel";
  r.growth_l = 2;
  r.F = [chi](Vec2, double n, double c, Vec2 gc, Vec2) { return -(chi(c) * n) * gc; };
  r.f = [k](Vec2, double n, double c, Vec2, Vec2) { return -k(c) * n; };
  if (grad_phi) r.G = [grad_phi](Vec2 x, double n, double, Vec2, Vec2) { return -n * grad_phi(x); };
  return r;
}

namespace {

// f, F, G stacked
std::array<double, 5> evaluate_rhs(const NonlinearRHS& r, Vec2 pos, const double* a) {
  const Vec2 z{a[2], a[3]}, w{a[4], a[5]};
  const double f = r.f ? r.f(pos, a[0], a[1], z, w) : 0.0;
  const Vec2 F = r.F ? r.F(pos, a[0], a[1], z, w) : Vec2{0, 0};
  const Vec2 G = r.G ? r.G(pos, a[0], a[1], z, w) : Vec2{0, 0};
  return {f, F.x, F.y, G.x, G.y};
}

void growth_constants(const NonlinearRHS& r, int samples, double log_max, std::uint64_t seed,
                      double& C, double& Cg) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(-2.0, log_max), unit(0.0, 1.0);
  C = Cg = 0;
  for (int s = 0; s < samples; ++s) {
    double a[6];
    for (double& v : a) v = (unit(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, mag(rng));
    const Vec2 pos{unit(rng), unit(rng)};
    const double base = 1 + std::abs(a[0]) + std::abs(a[1]) + std::hypot(a[2], a[3]) +
                        std::hypot(a[4], a[5]);
    const auto v = evaluate_rhs(r, pos, a);
    const double val = std::abs(v[0]) + std::hypot(v[1], v[2]) + std::hypot(v[3], v[4]);
    C = std::max(C, val / std::pow(base, r.growth_l));
    double jac = 0;
    for (int q = 0; q < 6; ++q) {
      const double step = 1e-6 * (1 + std::abs(a[q]));
      double ap[6], am[6];
      std::copy(a, a + 6, ap);
      std::copy(a, a + 6, am);
      ap[q] += step;
      am[q] -= step;
      const auto vp = evaluate_rhs(r, pos, ap), vm = evaluate_rhs(r, pos, am);
      for (int o = 0; o < 5; ++o) {
        const double d = (vp[o] - vm[o]) / (2 * step);
        jac += d * d;
      }
    }
    Cg = std::max(Cg, std::sqrt(jac) / std::pow(base, r.growth_l - 1));
  }
}

}  // namespace

GrowthCheck check_growth(const NonlinearRHS& rhs, int samples, std::uint64_t seed) {
  if (rhs.growth_l < 1) throw InvalidInput("growth exponent must be >= 1");
  GrowthCheck g;
  growth_constants(rhs, samples, 1.0, seed, g.C_inner, g.C_grad_inner);
  growth_constants(rhs, samples, 3.0, seed + 1, g.C, g.C_grad);
  g.C = std::max(g.C, g.C_inner);
  g.C_grad = std::max(g.C_grad, g.C_grad_inner);
  g.bounded = std::isfinite(g.C) && std::isfinite(g.C_grad) && g.C <= 2 * g.C_inner &&
              g.C_grad <= 2 * g.C_grad_inner;
  return g;
}

}  // namespace dstokes

#include "dstokes/heat_ibvp.hpp"

#include <cmath>

namespace dstokes {

BoxSpec default_box(const BoundaryCurve& c, const BoxSpec& base) {
  if (base.size > 0) return base;
  const auto [lo, hi] = c.bounding_box();
  BoxSpec b = base;
  b.center = 0.5 * (lo + hi);
  b.size = 4.0 * c.diameter();
  return b;
}

namespace {

void add_into(PeriodicSpectrum& a, const PeriodicSpectrum& b) {
  const std::size_t n2 = static_cast<std::size_t>(a.box().n) * a.box().n;
  for (std::size_t t = 0; t < a.times().size(); ++t)
    for (int c = 0; c < a.components(); ++c) {
      std::complex<double>* x = a.block(t, c);
      const std::complex<double>* y = b.block(t, c);
      for (std::size_t k = 0; k < n2; ++k) x[k] += y[k];
    }
}

// Spectrum of div F for a two-component spectrum; Nyquist modes dropped.
PeriodicSpectrum divergence(const PeriodicSpectrum& s) {
  const int n = s.box().n;
  const double k0 = 2 * kPi / s.box().size;
  PeriodicSpectrum d(s.box(), s.times(), 1);
  const std::complex<double> I(0, 1);
  for (std::size_t t = 0; t < s.times().size(); ++t)
    for (int ky = 0; ky < n; ++ky)
      for (int kx = 0; kx < n; ++kx) {
        if (kx == n / 2 || ky == n / 2) continue;
        const double xx = k0 * (kx < n / 2 ? kx : kx - n);
        const double yy = k0 * (ky < n / 2 ? ky : ky - n);
        const std::size_t k = static_cast<std::size_t>(ky) * n + kx;
        d.block(t, 0)[k] = I * (xx * s.block(t, 0)[k] + yy * s.block(t, 1)[k]);
      }
  return d;
}

}  // namespace

ExtensionOptions smooth_extension(const BoundaryCurve& c) {
  ExtensionOptions eo;
  eo.width = 0.8 * c.diameter();
  eo.reflect = true;
  eo.reflect_order = 3;
  eo.reflect_depth = 0.5 * c.diameter();
  return eo;
}

HeatSolution heat_ibvp_solve(const HeatProblem& p, const std::vector<Vec2>& targets,
                             const HeatSolveOptions& opt) {
  if (!(p.T > 0)) throw InvalidInput("T must be positive");
  if (opt.M < 8 || opt.M % 2) throw InvalidInput("M must be even and >= 8");
  if (opt.steps < 1) throw InvalidInput("steps must be >= 1");
  p.curve.validate(std::max(opt.M, 64));
  for (const Vec2& x : targets)
    if (!p.curve.inside(x)) throw InvalidInput("heat targets must lie inside the domain");

  const int M = opt.M, N = opt.steps;
  const double dt = p.T / N;
  HeatSolution sol;
  sol.times.resize(static_cast<std::size_t>(N + 1));
  for (int k = 0; k <= N; ++k) sol.times[k] = k * dt;
  const CurveNodes nodes = p.curve.nodes(M);
  const BoxSpec box = default_box(p.curve, opt.box);

  // whole-space part: W(v0 extended) + Lambda_0(f) + Lambda_0(div F)
  PeriodicSpectrum bg(box, sol.times, 1);
  if (p.v0) {
    ExtensionOptions eo = smooth_extension(p.curve);
    eo.anchor_mean = true;
    const auto v0 = extend_to_box([&](Vec2 x, double, double* v) { v[0] = p.v0(x); }, 1,
                                  {0.0}, p.curve, box, eo);
    add_into(bg, periodic_heat_semigroup(v0, sol.times, opt.workers));
  }
  if (p.f) {
    const ExtensionOptions eo = smooth_extension(p.curve);
    const auto fe = extend_to_box([&](Vec2 x, double t, double* v) { v[0] = p.f(x, t); }, 1,
                                  sol.times, p.curve, box, eo);
    add_into(bg, periodic_heat_potential(to_spectrum(fe, opt.workers)));
  }
  if (p.F) {
    const ExtensionOptions eo = smooth_extension(p.curve);
    const auto Fe = extend_to_box(p.F, 2, sol.times, p.curve, box, eo);
    add_into(bg, periodic_heat_potential(divergence(to_spectrum(Fe, opt.workers))));
  }

  // boundary datum for the density
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(M, N + 1);
  {
    const SampledField b = p.neumann ? bg.evaluate_gradient(nodes.pos, 0, opt.workers)
                                     : bg.evaluate(nodes.pos, opt.workers);
    for (int j = 0; j < M; ++j)
      for (int k = 0; k <= N; ++k) {
        const double data = p.g ? p.g(nodes.pos[j], sol.times[k]) : 0.0;
        const double back = p.neumann ? b.at(j, k, 0) * nodes.normal[j].x +
                                            b.at(j, k, 1) * nodes.normal[j].y
                                      : b.at(j, k, 0);
        G(j, k) = data - back;
      }
  }
  sol.compatibility = G.col(0).cwiseAbs().maxCoeff();

  const KernelKind bkind =
      p.neumann ? KernelKind::HeatNormalSingleLayer : KernelKind::HeatDoubleLayer;
  const KernelKind ikind = p.neumann ? KernelKind::HeatSingleLayer : KernelKind::HeatDoubleLayer;
  const LagOperator B = assemble_lag_operator(bkind, p.curve, nodes, node_targets(nodes), dt, N,
                                              opt.quadrature, opt.workers);
  const Eigen::MatrixXd A0 =
      interior_jump(bkind) * Eigen::MatrixXd::Identity(M, M) + B.lag(0);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A0);

  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(M, N + 1);
  for (int n = 1; n <= N; ++n) {
    Eigen::VectorXd rhs = G.col(n);
    for (int m = 1; m <= n; ++m) rhs.noalias() -= B.lag(m) * mu.col(n - m);
    mu.col(n) = lu.solve(rhs);
  }
  sol.density = mu;

  sol.u = SampledField(targets, sol.times, 1);
  if (!targets.empty()) {
    const LagOperator P = assemble_lag_operator(ikind, p.curve, nodes,
                                                point_targets(p.curve, targets), dt, N,
                                                opt.quadrature, opt.workers);
    const Eigen::MatrixXd layer = P.apply(mu);
    const SampledField b = bg.evaluate(targets, opt.workers);
    for (std::size_t i = 0; i < targets.size(); ++i)
      for (int k = 0; k <= N; ++k) sol.u.at(i, k) = b.at(i, k) + layer(static_cast<Eigen::Index>(i), k);
  }
  return sol;
}

}  // namespace dstokes

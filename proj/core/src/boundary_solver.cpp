#include "dstokes/boundary_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace dstokes {

// ---- compatibility ---------------------------------------------------------------

CompatibilityReport check_compatibility(const StokesProblem& p, int M, int steps) {
  CompatibilityReport r;
  const CurveNodes nodes = p.curve.nodes(M);
  const double dt = p.T / steps;
  double gscale = 0;
  if (p.g)
    for (int k = 0; k <= steps; ++k) {
      double flux = 0;
      for (int j = 0; j < M; ++j) {
        const Vec2 g = p.g(nodes.pos[j], k * dt);
        flux += dot(g, nodes.normal[j]) * nodes.weight[j];
        gscale = std::max(gscale, norm(g));
      }
      r.flux = std::max(r.flux, std::abs(flux));
    }
  double uscale = 0;
  if (p.u0) {
    const auto [lo, hi] = p.curve.bounding_box();
    const double h = 1e-5 * p.curve.diameter();
    const int n = 24;
    for (int iy = 0; iy <= n; ++iy)
      for (int ix = 0; ix <= n; ++ix) {
        const Vec2 x{lo.x + (hi.x - lo.x) * ix / n, lo.y + (hi.y - lo.y) * iy / n};
        if (!p.curve.inside(x) || p.curve.distance(x) < 2 * h) continue;
        const double div = (p.u0({x.x + h, x.y}).x - p.u0({x.x - h, x.y}).x +
                            p.u0({x.x, x.y + h}).y - p.u0({x.x, x.y - h}).y) /
                           (2 * h);
        r.divergence = std::max(r.divergence, std::abs(div));
        uscale = std::max(uscale, norm(p.u0(x)));
      }
  }
  for (int j = 0; j < M; ++j) {
    const Vec2 a = p.u0 ? p.u0(nodes.pos[j]) : Vec2{};
    const Vec2 b = p.g ? p.g(nodes.pos[j], 0.0) : Vec2{};
    r.trace = std::max(r.trace, norm(a - b));
    uscale = std::max(uscale, norm(a));
  }
  r.pass = r.divergence <= 1e-6 * (1 + uscale) && r.trace <= 1e-8 * (1 + uscale) &&
           r.flux <= 1e-8 * (1 + gscale * nodes.length);
  return r;
}

// ---- operators -------------------------------------------------------------------

StokesBoundaryOperators build_boundary_operators(const BoundaryCurve& curve, int M, double dt,
                                                 int steps, const SpaceTimeQuadrature& q,
                                                 int workers) {
  if (!(dt > 0) || steps < 1) throw InvalidInput("boundary operators need dt > 0, steps >= 1");
  StokesBoundaryOperators ops;
  ops.curve = curve;
  ops.nodes = curve.nodes(M);
  ops.dt = dt;
  ops.steps = steps;
  ops.jump = interior_jump(KernelKind::StokesTangential);
  const CurveNodes& nd = ops.nodes;
  const LagOperator L = assemble_lag_operator(KernelKind::StokesTangential, curve, nd,
                                              node_targets(nd), dt, steps, q, workers);
  ops.U_tan.resize(static_cast<std::size_t>(steps) + 1);
  ops.U_nor.resize(static_cast<std::size_t>(steps) + 1);
  for (int m = 0; m <= steps; ++m) {
    const Eigen::MatrixXd& W = L.lag(m);
    Eigen::MatrixXd& Ut = ops.U_tan[m];
    Eigen::MatrixXd& Un = ops.U_nor[m];
    Ut.resize(M, M);
    Un.resize(M, M);
    for (int j = 0; j < M; ++j) {
      Ut.row(j) = nd.tangent[j].x * W.row(2 * j) + nd.tangent[j].y * W.row(2 * j + 1);
      Un.row(j) = nd.normal[j].x * W.row(2 * j) + nd.normal[j].y * W.row(2 * j + 1);
    }
  }
  ops.grad_s = tangential_grad_matrix(nd);
  ops.kstar = kstar_matrix(nd);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(M, M) + ops.kstar;
  for (int k = 0; k < M; ++k) A.col(k).array() += nd.weight[k] / nd.length;
  ops.kstar_aug.compute(A);
  const double rc = ops.kstar_aug.rcond();
  if (!(rc > 1e-12)) throw GeometryError("I + K* is numerically singular on this curve");
  return ops;
}

namespace {

using Mat = Eigen::MatrixXd;

// column s of the result: sum_{k<=s} Op[s-k] X(:, k)
Mat apply_causal(const std::vector<Mat>& Op, const Mat& X) {
  Mat Y = Mat::Zero(X.rows(), X.cols());
  for (Eigen::Index s = 0; s < X.cols(); ++s)
    for (Eigen::Index k = 0; k <= s; ++k) Y.col(s).noalias() += Op[s - k] * X.col(k);
  return Y;
}

void remove_mean(Eigen::Ref<Eigen::VectorXd> v, const CurveNodes& nd) {
  double m = 0;
  for (int j = 0; j < nd.M; ++j) m += v(j) * nd.weight[j];
  v.array() -= m / nd.length;
}

double difference_norm(const StokesBoundaryOperators& ops, const Mat& dphi, const Mat& dpsi,
                       int first, const PicardOptions& opt) {
  const int M = ops.nodes.M;
  const auto S = static_cast<std::size_t>(dphi.cols());
  std::vector<double> times(S + 1);
  for (std::size_t s = 0; s <= S; ++s) times[s] = (first + static_cast<double>(s)) * ops.dt;
  SampledField f(ops.nodes.pos, times, 2);
  for (int j = 0; j < M; ++j)
    for (std::size_t s = 1; s <= S; ++s) {
      f.at(j, s, 0) = dphi(j, s - 1);
      f.at(j, s, 1) = dpsi(j, s - 1);
    }
  return parabolic_norm(f, opt.alpha, opt.mode, opt.workers).total();
}

}  // namespace

double SlabSolution::contraction() const {
  if (contraction_ratios.empty()) return 0.0;
  if (contraction_ratios.size() == 1) return contraction_ratios[0];
  double s = 0;
  for (std::size_t k = 1; k < contraction_ratios.size(); ++k) s += std::log(contraction_ratios[k]);
  return std::exp(s / static_cast<double>(contraction_ratios.size() - 1));
}

SlabSolution solve_slab(const StokesBoundaryOperators& ops, const Eigen::MatrixXd& g_tan,
                        const Eigen::MatrixXd& g_nor, const SpaceTimeDensity& hist, int first,
                        int last, const PicardOptions& opt) {
  const int M = ops.nodes.M;
  if (first < 0 || last <= first || last > ops.steps)
    throw InvalidInput("slab indices outside the operator time grid");
  if (g_tan.rows() != M || g_tan.cols() < last + 1 || g_nor.rows() != M ||
      g_nor.cols() < last + 1)
    throw InvalidInput("boundary data shape does not match the operators");
  const int S = last - first;

  // known part: data minus history of densities at indices <= first
  Mat Rt(M, S), Rn(M, S);
  for (int s = 0; s < S; ++s) {
    const int n = first + 1 + s;
    Rt.col(s) = g_tan.col(n);
    Rn.col(s) = g_nor.col(n);
    if (hist.phi.size() > 0)
      for (int k = 0; k <= first; ++k) {
        Rt.col(s).noalias() -= ops.U_tan[n - k] * hist.phi.col(k);
        Rn.col(s).noalias() -= ops.U_nor[n - k] * hist.phi.col(k);
      }
  }
  const double scale = std::max({1e-300, Rt.cwiseAbs().maxCoeff(), Rn.cwiseAbs().maxCoeff()});

  SlabSolution out;
  out.first = first;
  out.last = last;
  Mat phi = Mat::Zero(M, S), psi = Mat::Zero(M, S);
  if (Rt.cwiseAbs().maxCoeff() == 0 && Rn.cwiseAbs().maxCoeff() == 0) {
    out.phi = phi;
    out.psi = psi;
    return out;
  }

  double prev = -1;
  int rising = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    // (jump I + U_tan) phi = Rt - grad_S V[psi] by Neumann series
    const Mat rt = Rt - ops.grad_s * psi;
    Mat next = phi;
    bool inner_ok = false;
    double inner_prev = -1;
    for (int j = 0; j < opt.inner_max; ++j) {
      const Mat upd = (rt - apply_causal(ops.U_tan, next)) / ops.jump;
      const double d = (upd - next).cwiseAbs().maxCoeff();
      next = upd;
      if (!std::isfinite(d) || (inner_prev >= 0 && j > 4 && d > inner_prev))
        throw ContractionFailure("Neumann series for I + U_tan diverges; halve the slab",
                                 inner_prev > 0 ? d / inner_prev : 1.0);
      inner_prev = d;
      if (d <= 0.1 * opt.tol * scale) {
        inner_ok = true;
        break;
      }
    }
    if (!inner_ok)
      throw ContractionFailure("Neumann series for I + U_tan did not settle; halve the slab",
                               1.0);
    // (I + K*) psi = -2 (Rn - n . U[phi]), mean-zero part
    Mat rn = Rn - apply_causal(ops.U_nor, next);
    Mat psi_next(M, S);
    for (int s = 0; s < S; ++s) {
      Eigen::VectorXd b = -2.0 * rn.col(s);
      remove_mean(b, ops.nodes);
      psi_next.col(s) = ops.kstar_aug.solve(b);
    }
    const double diff = difference_norm(ops, next - phi, psi_next - psi, first, opt);
    phi = std::move(next);
    psi = std::move(psi_next);
    out.iterations = it;
    out.differences.push_back(diff);
    if (prev > 0) {
      const double ratio = diff / prev;
      out.contraction_ratios.push_back(ratio);
      rising = ratio >= 1.0 ? rising + 1 : 0;
      if (rising >= 2 || !std::isfinite(diff))
        throw ContractionFailure("Picard iteration does not contract on this slab; halve slab_T",
                                 ratio);
    }
    prev = diff;
    const double size = difference_norm(ops, phi, psi, first, opt);
    if (diff <= opt.tol * std::max(size, 1e-300)) break;
  }

  // residual of the slab system
  Mat res_t = ops.jump * phi + apply_causal(ops.U_tan, phi) + ops.grad_s * psi - Rt;
  Mat res_n = apply_causal(ops.U_nor, phi) - 0.5 * ((psi + ops.kstar * psi)) - Rn;
  for (int s = 0; s < S; ++s) remove_mean(res_n.col(s), ops.nodes);
  out.residual = std::max(res_t.cwiseAbs().maxCoeff(), res_n.cwiseAbs().maxCoeff());
  out.phi = std::move(phi);
  out.psi = std::move(psi);
  return out;
}

SlabSolution solve_boundary_system(const SampledField& g, const BoundaryCurve& curve,
                                   double slab_T, const PicardOptions& opt,
                                   const SpaceTimeQuadrature& q) {
  const auto& ts = g.times();
  if (ts.size() < 2 || g.components() != 2) throw InvalidInput("boundary data needs 2 components, >= 2 times");
  const double dt = ts[1] - ts[0];
  const int steps = std::min(static_cast<int>(std::lround(slab_T / dt)),
                             static_cast<int>(ts.size()) - 1);
  if (steps < 1) throw InvalidInput("slab shorter than one time step");
  const int M = static_cast<int>(g.n_points());
  const StokesBoundaryOperators ops = build_boundary_operators(curve, M, dt, steps, q, opt.workers);
  Mat gt(M, steps + 1), gn(M, steps + 1);
  double g0 = 0, gs = 0;
  for (int j = 0; j < M; ++j)
    for (int k = 0; k <= steps; ++k) {
      const Vec2 v{g.at(j, k, 0), g.at(j, k, 1)};
      gt(j, k) = dot(v, ops.nodes.tangent[j]);
      gn(j, k) = dot(v, ops.nodes.normal[j]);
      gs = std::max(gs, norm(v));
      if (k == 0) g0 = std::max(g0, norm(v));
    }
  if (g0 > 1e-10 * (1 + gs)) throw CompatibilityError("boundary datum must vanish at t = 0");
  return solve_slab(ops, gt, gn, {}, 0, steps, opt);
}

ContinuationResult continue_in_time(const StokesBoundaryOperators& ops, const Eigen::MatrixXd& g_tan,
                                    const Eigen::MatrixXd& g_nor, int slab_steps,
                                    const PicardOptions& opt, double joint_tol) {
  const int M = ops.nodes.M, N = ops.steps;
  ContinuationResult res;
  res.density.phi = Mat::Zero(M, N + 1);
  res.density.psi = Mat::Zero(M, N + 1);
  int len = std::clamp(slab_steps, 1, N);
  int first = 0;
  const double scale = std::max(g_tan.cwiseAbs().maxCoeff(), g_nor.cwiseAbs().maxCoeff());
  while (first < N) {
    const int last = std::min(first + len, N);
    SlabSolution sl;
    try {
      sl = solve_slab(ops, g_tan, g_nor, res.density, first, last, opt);
    } catch (const ContractionFailure&) {
      if (last - first == 1) throw;
      len = std::max(1, (last - first) / 2);
      continue;
    }
    res.density.phi.middleCols(first + 1, last - first) = sl.phi;
    res.density.psi.middleCols(first + 1, last - first) = sl.psi;
    res.max_joint_residual = std::max(res.max_joint_residual, sl.residual);
    if (sl.residual > joint_tol * (1 + scale))
      throw ContinuationError("slab system residual too large at a continuation joint",
                              sl.residual);
    res.slab_lengths.push_back((last - first) * ops.dt);
    res.slabs.push_back(std::move(sl));
    first = last;
  }
  return res;
}

double boundary_residual(const StokesBoundaryOperators& ops, const SpaceTimeDensity& d,
                         const Eigen::MatrixXd& g_tan, const Eigen::MatrixXd& g_nor) {
  const int N = ops.steps;
  const Mat phi = d.phi.middleCols(1, N), psi = d.psi.middleCols(1, N);
  Mat rt = ops.jump * phi + apply_causal(ops.U_tan, phi) + ops.grad_s * psi -
           g_tan.middleCols(1, N);
  Mat rn = apply_causal(ops.U_nor, phi) - 0.5 * (psi + ops.kstar * psi) - g_nor.middleCols(1, N);
  for (int s = 0; s < N; ++s) remove_mean(rn.col(s), ops.nodes);
  return std::max(rt.cwiseAbs().maxCoeff(), rn.cwiseAbs().maxCoeff());
}

SampledField assemble_interior(const SpaceTimeDensity& d, const StokesBoundaryOperators& ops,
                               const std::vector<Vec2>& targets, const SpaceTimeQuadrature& q,
                               int workers, int* near_count) {
  const int N = ops.steps;
  std::vector<double> times(static_cast<std::size_t>(N) + 1);
  for (int k = 0; k <= N; ++k) times[k] = k * ops.dt;
  SampledField u(targets, times, 2);
  if (near_count) *near_count = 0;
  if (targets.empty()) return u;
  const LagOperator P = assemble_lag_operator(KernelKind::StokesTangential, ops.curve, ops.nodes,
                                              point_targets(ops.curve, targets), ops.dt, N, q,
                                              workers);
  const Mat Uphi = P.apply(d.phi);
  std::vector<int> near(targets.size(), 0);
  parallel_for(targets.size(), workers, [&](std::size_t i) {
    for (int k = 0; k <= N; ++k) {
      std::vector<double> col(d.psi.col(k).data(), d.psi.col(k).data() + d.psi.rows());
      bool nr = false;
      const Vec2 gv = grad_single_layer_V(col, ops.nodes, targets[i], &nr);
      near[i] = nr ? 1 : near[i];
      u.at(i, k, 0) = Uphi(static_cast<Eigen::Index>(2 * i), k) + gv.x;
      u.at(i, k, 1) = Uphi(static_cast<Eigen::Index>(2 * i + 1), k) + gv.y;
    }
  });
  if (near_count)
    for (int v : near) *near_count += v;
  return u;
}

// ---- full solve ------------------------------------------------------------------

double SolveReport::estimate_ratio() const {
  const double b = rhs_bundle();
  return b > 0 ? norm_u / b : 0.0;
}

namespace {

// Stream function of a divergence-free field by integration along rays from c:
// d psi = u1 dy - u2 dx.
double stream_function(const std::function<Vec2(Vec2)>& u0, Vec2 c, Vec2 x,
                       const QuadRule& rule) {
  const Vec2 d = x - c;
  double s = 0;
  for (std::size_t k = 0; k < rule.x.size(); ++k)
    s += rule.w[k] * cross(u0(c + rule.x[k] * d), d);
  return s;
}

SampledField sample_on(const std::vector<Vec2>& pts, const std::vector<double>& times, int comps,
                       const std::function<void(Vec2, double, double*)>& fn) {
  SampledField f(pts, times, comps);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t k = 0; k < times.size(); ++k) fn(pts[i], times[k], &f.at(i, k, 0));
  return f;
}

}  // namespace

StokesSolution solve_stokes_ibvp(const StokesProblem& p, const std::vector<Vec2>& targets,
                                 const StokesSolveOptions& opt) {
  const auto clock0 = std::chrono::steady_clock::now();
  if (!(p.T > 0)) throw InvalidInput("T must be positive");
  if (opt.M < 8 || opt.M % 2) throw InvalidInput("M must be even and >= 8");
  if (opt.steps < 1) throw InvalidInput("steps must be >= 1");
  p.curve.validate(std::max(opt.M, 64));
  for (const Vec2& x : targets)
    if (!p.curve.inside(x)) throw InvalidInput("Stokes targets must lie inside the domain");

  StokesSolution sol;
  SolveReport& rep = sol.report;
  rep.compatibility = check_compatibility(p, opt.M, opt.steps);
  if (!rep.compatibility.pass)
    throw CompatibilityError("incompatible data: div u0 " +
                             std::to_string(rep.compatibility.divergence) + ", trace " +
                             std::to_string(rep.compatibility.trace) + ", flux " +
                             std::to_string(rep.compatibility.flux));

  const int M = opt.M, N = opt.steps;
  const double dt = p.T / N;
  sol.times.resize(static_cast<std::size_t>(N) + 1);
  for (int k = 0; k <= N; ++k) sol.times[k] = k * dt;
  const BoxSpec box = default_box(p.curve, opt.box);
  const CurveNodes nodes = p.curve.nodes(M);

  // whole-space part at nodes and targets: V1 + V2 + v
  SampledField bg_nodes(nodes.pos, sol.times, 2), bg_targets(targets, sol.times, 2);
  if (p.u0) {
    const auto [lo, hi] = p.curve.bounding_box();
    const Vec2 c = 0.5 * (lo + hi);
    if (!p.curve.inside(c)) throw GeometryError("stream function needs the box centre inside the domain");
    const QuadRule rule = gauss_legendre(24, 0.0, 1.0);
    ExtensionOptions eo = smooth_extension(p.curve);
    eo.anchor_mean = true;
    const auto psi = extend_to_box(
        [&](Vec2 x, double, double* v) { v[0] = stream_function(p.u0, c, x, rule); }, 1, {0.0},
        p.curve, box, eo);
    const PeriodicSpectrum S = periodic_heat_semigroup(psi, sol.times, opt.workers);
    for (auto* pair : {&bg_nodes, &bg_targets}) {
      const SampledField gpsi = S.evaluate_gradient(pair->points(), 0, opt.workers);
      for (std::size_t i = 0; i < pair->n_points(); ++i)
        for (std::size_t k = 0; k < sol.times.size(); ++k) {
          pair->at(i, k, 0) += gpsi.at(i, k, 1);
          pair->at(i, k, 1) -= gpsi.at(i, k, 0);
        }
    }
  }
  if (p.f) {
    const auto fe = extend_to_box(
        [&](Vec2 x, double t, double* v) {
          const Vec2 f = p.f(x, t);
          v[0] = f.x;
          v[1] = f.y;
        },
        2, sol.times, p.curve, box, smooth_extension(p.curve));
    const PeriodicSpectrum S = build_V1_spectrum(fe, opt.workers);
    bg_nodes += S.evaluate(nodes.pos, opt.workers);
    bg_targets += S.evaluate(targets, opt.workers);
  }
  if (p.F) {
    const auto Fe = extend_to_box(p.F, 4, sol.times, p.curve, box, smooth_extension(p.curve));
    const PeriodicSpectrum S = build_V2_spectrum(Fe, opt.workers);
    bg_nodes += S.evaluate(nodes.pos, opt.workers);
    bg_targets += S.evaluate(targets, opt.workers);
  }

  // boundary datum G = g - V1 - V2 - v
  Mat gt(M, N + 1), gn(M, N + 1);
  for (int j = 0; j < M; ++j)
    for (int k = 0; k <= N; ++k) {
      const Vec2 g = p.g ? p.g(nodes.pos[j], sol.times[k]) : Vec2{};
      const Vec2 G = g - Vec2{bg_nodes.at(j, k, 0), bg_nodes.at(j, k, 1)};
      gt(j, k) = dot(G, nodes.tangent[j]);
      gn(j, k) = dot(G, nodes.normal[j]);
      if (k == 0) rep.initial_mismatch = std::max(rep.initial_mismatch, norm(G));
    }

  const StokesBoundaryOperators ops =
      build_boundary_operators(p.curve, M, dt, N, opt.quadrature, opt.workers);
  const int slab_steps =
      opt.slab_T > 0 ? std::max(1, static_cast<int>(std::lround(opt.slab_T / dt))) : N;
  PicardOptions po = opt.picard;
  if (po.workers == 0) po.workers = opt.workers;
  const ContinuationResult cont = continue_in_time(ops, gt, gn, slab_steps, po);
  sol.density = cont.density;
  rep.slab_lengths = cont.slab_lengths;
  for (const auto& s : cont.slabs) {
    rep.contraction.push_back(s.contraction());
    rep.iterations += s.iterations;
  }
  rep.boundary_residual = boundary_residual(ops, sol.density, gt, gn);

  sol.u = assemble_interior(sol.density, ops, targets, opt.quadrature, opt.workers,
                            &rep.near_targets);
  sol.u += bg_targets;

  // norms of the a priori estimate, measured on the targets and nodes
  const ScanMode mode = po.mode;
  if (!targets.empty()) {
    rep.norm_u = parabolic_norm(sol.u, p.alpha, mode, opt.workers).total();
    if (p.u0) {
      const SampledField u0 = sample_on(targets, {0.0}, 2, [&](Vec2 x, double, double* v) {
        const Vec2 a = p.u0(x);
        v[0] = a.x;
        v[1] = a.y;
      });
      rep.norm_u0 = sup_norm(u0) + space_seminorm(u0, p.alpha, mode);
    }
    if (p.f)
      rep.norm_f = parabolic_norm(sample_on(targets, sol.times, 2,
                                            [&](Vec2 x, double t, double* v) {
                                              const Vec2 a = p.f(x, t);
                                              v[0] = a.x;
                                              v[1] = a.y;
                                            }),
                                  p.alpha, mode, opt.workers)
                       .total();
    if (p.F)
      rep.norm_F =
          parabolic_norm(sample_on(targets, sol.times, 4, p.F), p.alpha, mode, opt.workers)
              .total();
  }
  if (p.g) {
    const SampledField gs = sample_on(nodes.pos, sol.times, 2, [&](Vec2 x, double t, double* v) {
      const Vec2 a = p.g(x, t);
      v[0] = a.x;
      v[1] = a.y;
    });
    rep.norm_g = parabolic_norm(gs, p.alpha, mode, opt.workers).total();
    SampledField gnor(nodes.pos, sol.times, 1);
    for (int j = 0; j < M; ++j)
      for (int k = 0; k <= N; ++k)
        gnor.at(j, k) = gs.at(j, k, 0) * nodes.normal[j].x + gs.at(j, k, 1) * nodes.normal[j].y;
    rep.mixed_g_normal = mixed_boundary_seminorm(gnor, p.alpha, p.eta, mode);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
  return sol;
}

// ---- weak form -------------------------------------------------------------------

namespace {

struct TensorGrid {
  std::vector<double> xs, ys;
  std::vector<std::size_t> index;  // iy * nx + ix -> point index
  std::size_t nx() const { return xs.size(); }
  std::size_t ny() const { return ys.size(); }
  std::size_t at(std::size_t ix, std::size_t iy) const { return index[iy * nx() + ix]; }
};

TensorGrid tensor_grid(const std::vector<Vec2>& pts) {
  TensorGrid g;
  for (const Vec2& p : pts) {
    g.xs.push_back(p.x);
    g.ys.push_back(p.y);
  }
  auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(g.xs);
  uniq(g.ys);
  if (g.xs.size() * g.ys.size() != pts.size() || g.xs.size() < 3 || g.ys.size() < 3)
    throw InvalidInput("weak residual needs fields on a full tensor grid");
  g.index.assign(pts.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto ix = static_cast<std::size_t>(
        std::lower_bound(g.xs.begin(), g.xs.end(), pts[i].x) - g.xs.begin());
    const auto iy = static_cast<std::size_t>(
        std::lower_bound(g.ys.begin(), g.ys.end(), pts[i].y) - g.ys.begin());
    g.index[iy * g.nx() + ix] = i;
  }
  return g;
}

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  std::vector<double> w(x.size(), 0.0);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = x[i + 1] - x[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

}  // namespace

SampledField divergence_free_test_field(const std::vector<double>& xs,
                                        const std::vector<double>& ys,
                                        const std::vector<double>& times,
                                        const std::function<double(Vec2, double)>& chi) {
  const std::size_t nx = xs.size(), ny = ys.size();
  if (nx < 3 || ny < 3) throw InvalidInput("test field grid needs >= 3 nodes per axis");
  std::vector<Vec2> pts;
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) pts.push_back({xs[ix], ys[iy]});
  SampledField phi(pts, times, 2);
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t iy = 1; iy + 1 < ny; ++iy)
      for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
        const double t = times[k];
        const std::size_t i = iy * nx + ix;
        phi.at(i, k, 0) = (chi({xs[ix], ys[iy + 1]}, t) - chi({xs[ix], ys[iy - 1]}, t)) /
                          (ys[iy + 1] - ys[iy - 1]);
        phi.at(i, k, 1) = -(chi({xs[ix + 1], ys[iy]}, t) - chi({xs[ix - 1], ys[iy]}, t)) /
                          (xs[ix + 1] - xs[ix - 1]);
      }
  return phi;
}

double weak_residual(const SampledField& u, const SampledField& test,
                     const std::function<Vec2(Vec2, double)>& f,
                     const std::function<void(Vec2, double, double*)>& F, double div_tol) {
  if (u.components() != 2 || test.components() != 2)
    throw InvalidInput("weak residual needs two-component fields");
  if (u.points().size() != test.points().size() || u.times() != test.times())
    throw InvalidInput("velocity and test field must share points and times");
  const TensorGrid G = tensor_grid(u.points());
  const std::size_t nx = G.nx(), ny = G.ny(), nt = u.n_times();
  const auto wx = trapezoid_weights(G.xs), wy = trapezoid_weights(G.ys);
  const auto wt = nt > 1 ? trapezoid_weights(u.times()) : std::vector<double>(nt, 1.0);

  // centred difference of component c along an axis at interior node
  auto dx = [&](const SampledField& s, std::size_t ix, std::size_t iy, std::size_t k, int c) {
    return (s.at(G.at(ix + 1, iy), k, c) - s.at(G.at(ix - 1, iy), k, c)) /
           (G.xs[ix + 1] - G.xs[ix - 1]);
  };
  auto dy = [&](const SampledField& s, std::size_t ix, std::size_t iy, std::size_t k, int c) {
    return (s.at(G.at(ix, iy + 1), k, c) - s.at(G.at(ix, iy - 1), k, c)) /
           (G.ys[iy + 1] - G.ys[iy - 1]);
  };

  double div_max = 0, grad_max = 0;
  for (std::size_t k = 0; k < nt; ++k)
    for (std::size_t iy = 1; iy + 1 < ny; ++iy)
      for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
        div_max = std::max(div_max, std::abs(dx(test, ix, iy, k, 0) + dy(test, ix, iy, k, 1)));
        grad_max = std::max({grad_max, std::abs(dx(test, ix, iy, k, 0)),
                             std::abs(dy(test, ix, iy, k, 1))});
      }
  if (div_max > div_tol * std::max(1.0, grad_max))
    throw InvalidInput("test field is not discretely divergence-free");

  double total = 0;
  double Fv[4];
  for (std::size_t k = 0; k < nt; ++k) {
    const double t = u.times()[k];
    for (std::size_t iy = 1; iy + 1 < ny; ++iy)
      for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
        const std::size_t i = G.at(ix, iy);
        const Vec2 x = u.points()[i];
        double v = 0;
        for (int c = 0; c < 2; ++c) {
          const double gpx = dx(test, ix, iy, k, c), gpy = dy(test, ix, iy, k, c);
          v += dx(u, ix, iy, k, c) * gpx + dy(u, ix, iy, k, c) * gpy;
          double pt = 0;
          if (nt > 1) {
            const std::size_t a = k == 0 ? 0 : k - 1, b = k + 1 == nt ? k : k + 1;
            pt = (test.at(i, b, c) - test.at(i, a, c)) / (u.times()[b] - u.times()[a]);
          }
          v -= u.at(i, k, c) * pt;
          if (F) {
            F(x, t, Fv);
            v += Fv[2 * c] * gpx + Fv[2 * c + 1] * gpy;
          }
        }
        if (f) {
          const Vec2 fv = f(x, t);
          v -= fv.x * test.at(i, k, 0) + fv.y * test.at(i, k, 1);
        }
        total += wt[k] * wx[ix] * wy[iy] * v;
      }
  }
  return std::abs(total);
}

}  // namespace dstokes

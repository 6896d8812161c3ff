#include "dstokes/layer_potentials.hpp"

#include <algorithm>
#include <array>
#include <complex>

#include "dstokes/faddeeva.hpp"
#include "dstokes/heat_kernel.hpp"

namespace dstokes {

// ---- Laplace single layer ------------------------------------------------------

double single_layer_V(const std::vector<double>& psi, const CurveNodes& n,
                      Vec2 x, bool* near) {
  double acc = 0, dmin = 1e300;
  for (int j = 0; j < n.M; ++j) {
    const Vec2 d = x - n.pos[j];
    dmin = std::min(dmin, norm(d));
    acc += std::log(norm2(d)) * psi[j] * n.weight[j];
  }
  if (near) *near = dmin < n.h();
  return acc / (4 * kPi);
}

Vec2 grad_single_layer_V(const std::vector<double>& psi, const CurveNodes& n,
                         Vec2 x, bool* near) {
  Vec2 acc;
  double dmin = 1e300;
  for (int j = 0; j < n.M; ++j) {
    const Vec2 d = x - n.pos[j];
    const double r2 = norm2(d);
    dmin = std::min(dmin, std::sqrt(r2));
    acc += (psi[j] * n.weight[j] / r2) * d;
  }
  if (near) *near = dmin < n.h();
  return (1.0 / (2 * kPi)) * acc;
}

std::vector<double> single_layer_boundary(const std::vector<double>& psi,
                                          const CurveNodes& n) {
  const int M = n.M;
  if (M % 2) throw InvalidInput("logarithmic rule needs even M");
  const int h = M / 2;
  std::vector<double> out(M, 0.0);
  for (int i = 0; i < M; ++i) {
    double acc = 0;
    for (int j = 0; j < M; ++j) {
      const double dt = n.theta[i] - n.theta[j];
      double R = -kPi / (h * h) * std::cos(h * dt);
      for (int m = 1; m < h; ++m) R -= 2 * kPi / h * std::cos(m * dt) / m;
      double L;
      if (i == j) {
        L = std::log(n.speed[i] * n.speed[i]);
      } else {
        const double s = std::sin(0.5 * dt);
        L = std::log(norm2(n.pos[i] - n.pos[j]) / (4 * s * s));
      }
      acc += (R + 2 * kPi / M * L) * psi[j] * n.speed[j];
    }
    out[i] = acc / (4 * kPi);
  }
  return out;
}

Eigen::MatrixXd spectral_derivative_matrix(int M) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      if (i == j) continue;
      const double x = 2 * kPi * (i - j) / M;
      const double sgn = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = (M % 2 == 0) ? 0.5 * sgn / std::tan(0.5 * x)
                             : 0.5 * sgn / std::sin(0.5 * x);
    }
  return D;
}

Eigen::MatrixXd kstar_matrix(const CurveNodes& n) {
  const int M = n.M;
  Eigen::MatrixXd K(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      double k;
      if (i == j) {
        k = 0.5 * n.curvature[i];
      } else {
        const Vec2 d = n.pos[i] - n.pos[j];
        k = dot(d, n.normal[i]) / norm2(d);
      }
      K(i, j) = kKstarConstant * k * n.weight[j];
    }
  return K;
}

std::vector<double> kstar(const std::vector<double>& psi, const CurveNodes& n) {
  const Eigen::VectorXd v =
      kstar_matrix(n) * Eigen::Map<const Eigen::VectorXd>(psi.data(), n.M);
  return {v.data(), v.data() + v.size()};
}

Eigen::MatrixXd tangential_grad_matrix(const CurveNodes& n) {
  // (1/2pi) p.v. int (P-Z).T(P)/|P-Z|^2 psi dZ, split as
  //   (P-Z).T(Z)/|P-Z|^2 (psi(Z) - psi(P))   [mean cancellation]
  // + (P-Z).(T(P)-T(Z))/|P-Z|^2 psi(Z)       [bounded, zero on diagonal]
  const int M = n.M;
  Eigen::MatrixXd A = -spectral_derivative_matrix(M) / M;
  for (int i = 0; i < M; ++i) {
    double diag = 0;
    for (int j = 0; j < M; ++j) {
      if (i == j) continue;
      const Vec2 d = n.pos[i] - n.pos[j];
      const double r2 = norm2(d);
      const double k1 = dot(d, n.tangent[j]) / r2;
      const double k2 = dot(d, n.tangent[i] - n.tangent[j]) / r2;
      A(i, j) += (k1 + k2) * n.speed[j] / M;
      diag -= k1 * n.speed[j] / M;
    }
    A(i, i) += diag;
  }
  return A;
}

std::vector<double> tangential_grad_S_V(const std::vector<double>& psi,
                                        const CurveNodes& n) {
  const Eigen::VectorXd v = tangential_grad_matrix(n) *
                            Eigen::Map<const Eigen::VectorXd>(psi.data(), n.M);
  return {v.data(), v.data() + v.size()};
}

// ---- pressure tensor ----------------------------------------------------------------

namespace {

const QuadRule& unit_gauss(int order) {
  static const std::array<QuadRule, 17> rules = [] {
    std::array<QuadRule, 17> r;
    for (int k = 1; k <= 16; ++k) r[k] = gauss_legendre(k, 0.0, 1.0);
    return r;
  }();
  return rules[static_cast<std::size_t>(order)];
}

constexpr double kStripCut = 12.0;

}  // namespace

StripValue pressure_strip(double a_hat, double b_hat, int refine) {
  StripValue out;
  const double width = std::min(std::abs(b_hat), kStripCut);
  if (width == 0.0) return out;
  const double lo = b_hat < 0 ? -width : 0.0;
  const int order = width < 0.5 ? 6 : 8;
  const int panels = std::max(1, static_cast<int>(std::ceil(width / 2.0))) *
                     std::max(1, refine);
  const QuadRule& g = unit_gauss(order);
  const double ph = width / panels;
  const std::complex<double> i_sqrtpi(0.0, 0.5641895835477563);
  const double X = 0.5 * a_hat;
  for (int p = 0; p < panels; ++p) {
    const double base = lo + p * ph;
    for (int k = 0; k < order; ++k) {
      const double h = base + ph * g.x[k];
      const double w = b_hat - h;
      const std::complex<double> z(X, 0.5 * std::abs(w));
      const std::complex<double> W = faddeeva_w(z);
      const std::complex<double> dW = -z * W + i_sqrtpi;
      const double pref = ph * g.w[k] * h * std::exp(-0.25 * h * h) /
                          (16.0 * kPi);
      const double sgn = w >= 0 ? 1.0 : -1.0;
      out.q.x += pref * W.imag();
      out.q.y += pref * sgn * W.real();
      out.dq_a.x += pref * dW.imag();
      out.dq_a.y += pref * sgn * dW.real();
    }
  }
  return out;
}

Vec2 pressure_tensor_q(Vec2 x, const SourcePoint& Q, double t, int refine) {
  if (!(t > 0)) throw DomainError("q needs t > 0");
  const Vec2 d = x - Q.pos;
  const double st = std::sqrt(t);
  const StripValue s =
      pressure_strip(dot(d, Q.tangent) / st, dot(d, Q.normal) / st, refine);
  return (1.0 / t) * (s.q.x * Q.tangent + s.q.y * Q.normal);
}

Vec2 pressure_tensor_dq(Vec2 x, const SourcePoint& Q, double t, int refine) {
  if (!(t > 0)) throw DomainError("q needs t > 0");
  const Vec2 d = x - Q.pos;
  const double st = std::sqrt(t);
  const StripValue s =
      pressure_strip(dot(d, Q.tangent) / st, dot(d, Q.normal) / st, refine);
  return (1.0 / (t * st)) * (s.dq_a.x * Q.tangent + s.dq_a.y * Q.normal);
}

namespace {

inline Vec2 stokes_column(Vec2 x, const SourcePoint& Q, double t,
                          int refine) {
  const Vec2 d = x - Q.pos;
  const double st = std::sqrt(t);
  const double b = dot(d, Q.normal);
  const StripValue s = pressure_strip(dot(d, Q.tangent) / st, b / st, refine);
  const double gam = std::exp(-norm2(d) / (4 * t)) / (4 * kPi * t);
  const double c = -2.0 * b / (2.0 * t) * gam;
  const double f = 4.0 / (t * st);
  return c * Q.tangent + f * (s.dq_a.x * Q.tangent + s.dq_a.y * Q.normal);
}

}  // namespace

Vec2 green_tangent_column(Vec2 x, const SourcePoint& Q, double t) {
  if (!(t > 0)) throw DomainError("G needs t > 0");
  return stokes_column(x, Q, t, 1);
}

Mat2 green_tensor_G(Vec2 x, const SourcePoint& Q, double t) {
  const Vec2 c = green_tangent_column(x, Q, t);
  const Vec2 tq = Q.tangent;
  return {c.x * tq.x, c.x * tq.y, c.y * tq.x, c.y * tq.y};
}

// ---- space-time operators ---------------------------------------------------------

int kernel_components(KernelKind k) {
  return k == KernelKind::StokesTangential ? 2 : 1;
}

double interior_jump(KernelKind k) {
  switch (k) {
    case KernelKind::HeatDoubleLayer:
      return -0.5;
    case KernelKind::HeatSingleLayer:
      return 0.0;
    case KernelKind::HeatNormalSingleLayer:
      return 0.5;
    case KernelKind::StokesTangential:
      return 1.0;
  }
  return 0.0;
}

std::vector<LagTarget> node_targets(const CurveNodes& n) {
  std::vector<LagTarget> t(static_cast<std::size_t>(n.M));
  for (int i = 0; i < n.M; ++i) t[i] = {n.pos[i], n.normal[i], i, 0.0};
  return t;
}

std::vector<LagTarget> point_targets(const BoundaryCurve& c,
                                     const std::vector<Vec2>& pts) {
  std::vector<LagTarget> t;
  t.reserve(pts.size());
  for (const auto& p : pts) {
    const double th = c.nearest_theta(p);
    t.push_back({p, c.normal(th), -1, norm(c.gamma(th) - p)});
  }
  return t;
}

LagOperator::LagOperator(int targets, int comps, int nodes, int steps,
                         double dt)
    : targets_(targets), comps_(comps), nodes_(nodes), steps_(steps), dt_(dt) {
  W_.assign(static_cast<std::size_t>(steps + 1),
            Eigen::MatrixXd::Zero(targets * comps, nodes));
}

Eigen::MatrixXd LagOperator::apply(const Eigen::MatrixXd& mu,
                                   int max_lag) const {
  if (mu.rows() != nodes_) throw InvalidInput("density has wrong node count");
  const int K = static_cast<int>(mu.cols());
  if (K - 1 > steps_) throw InvalidInput("density longer than operator");
  const int L = max_lag < 0 ? K - 1 : std::min(max_lag, K - 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(targets_ * comps_, K);
  for (int m = 0; m <= L; ++m)
    out.rightCols(K - m).noalias() += W_[m] * mu.leftCols(K - m);
  return out;
}

namespace {

struct TauNode {
  double tau, weight, lambda;
  int lag;
};

std::vector<TauNode> tau_nodes(double dt, int steps,
                               const SpaceTimeQuadrature& q) {
  std::vector<TauNode> out;
  // first step: tau = sigma^4
  const QuadRule r0 =
      composite_gauss(q.first_panels, q.first_order, 0.0, std::pow(dt, 0.25));
  for (std::size_t i = 0; i < r0.x.size(); ++i) {
    const double s = r0.x[i], tau = s * s * s * s;
    out.push_back({tau, r0.w[i] * 4 * s * s * s, tau / dt, 0});
  }
  for (int k = 1; k < steps; ++k) {
    const int order = k <= q.near_steps ? q.near_order : q.far_order;
    const QuadRule r = gauss_legendre(order, k * dt, (k + 1) * dt);
    for (std::size_t i = 0; i < r.x.size(); ++i)
      out.push_back({r.x[i], r.w[i], (r.x[i] - k * dt) / dt, k});
  }
  return out;
}

// Smooth cutoff equal to 1 for u <= u0 and 0 for u >= 1.
double window_cutoff(double u) {
  const double u0 = 0.25;
  u = std::abs(u);
  if (u <= u0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double v = (1.0 - u) / (1.0 - u0);
  const double a = std::exp(-1.0 / v), b = std::exp(-1.0 / (1.0 - v));
  return a / (a + b);
}

// Periodic cardinal function of the M-point trigonometric interpolant.
double cardinal(int M, double x) {
  const double s = std::sin(0.5 * x);
  if (std::abs(s) < 1e-14) return std::cos(0.5 * M * x) >= 0 ? 1.0 : -1.0;
  if (M % 2 == 0) return std::sin(0.5 * M * x) * std::cos(0.5 * x) / (M * s);
  return std::sin(0.5 * M * x) / (M * s);
}

inline void eval_kernel(KernelKind kind, const LagTarget& x,
                        const SourcePoint& Q, double tau, int refine,
                        double* out) {
  const Vec2 d = x.x - Q.pos;
  switch (kind) {
    case KernelKind::HeatDoubleLayer: {
      const double g = std::exp(-norm2(d) / (4 * tau)) / (4 * kPi * tau);
      out[0] = dot(d, Q.normal) / (2 * tau) * g;
      return;
    }
    case KernelKind::HeatSingleLayer:
      out[0] = std::exp(-norm2(d) / (4 * tau)) / (4 * kPi * tau);
      return;
    case KernelKind::HeatNormalSingleLayer: {
      const double g = std::exp(-norm2(d) / (4 * tau)) / (4 * kPi * tau);
      out[0] = -dot(d, x.normal) / (2 * tau) * g;
      return;
    }
    case KernelKind::StokesTangential: {
      const Vec2 c = stokes_column(x.x, Q, tau, refine);
      out[0] = c.x;
      out[1] = c.y;
      return;
    }
  }
}

SourcePoint source_at(const BoundaryCurve& c, double theta, double* speed) {
  const Vec2 d = c.d1(theta);
  const double s = norm(d);
  *speed = s;
  const Vec2 t = (1.0 / s) * d;
  return {c.gamma(theta), t, {t.y, -t.x}};
}

}  // namespace

LagOperator assemble_lag_operator(KernelKind kind, const BoundaryCurve& curve,
                                  const CurveNodes& nodes,
                                  const std::vector<LagTarget>& targets,
                                  double dt, int steps,
                                  const SpaceTimeQuadrature& q, int workers) {
  if (!(dt > 0) || steps < 1) throw InvalidInput("bad time grid");
  const int M = nodes.M, C = kernel_components(kind);
  const int T = static_cast<int>(targets.size());
  LagOperator op(T, C, M, steps, dt);
  const std::vector<TauNode> tn = tau_nodes(dt, steps, q);
  const double h = nodes.h();
  double smax = 0;
  for (double s : nodes.speed) smax = std::max(smax, s);
  const double dth = 2 * kPi / M;

  std::vector<SourcePoint> src(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j)
    src[j] = {nodes.pos[j], nodes.tangent[j], nodes.normal[j]};

  // Local-window data per tau node (boundary targets only).
  const double Wth = std::min(q.window_nodes * dth, 0.45 * 2 * kPi);
  std::vector<double> chi_off(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    double off = m * dth;
    if (off > kPi) off -= 2 * kPi;
    chi_off[m] = window_cutoff(off / Wth);
  }
  struct LocalRule {
    bool local = false;
    std::vector<double> delta, weight;  // includes cutoff
    Eigen::MatrixXd card;               // fine x M
  };
  std::vector<LocalRule> rules(tn.size());
  const QuadRule& g = unit_gauss(q.fine_order);
  for (std::size_t k = 0; k < tn.size(); ++k) {
    const double st = std::sqrt(tn[k].tau);
    if (!(st < q.local_threshold * h)) continue;
    LocalRule& R = rules[k];
    R.local = true;
    const double dmin = std::min(st / (8 * smax), 0.5 * Wth);
    std::vector<double> bp{0.0};
    for (double b = dmin; b < Wth; b *= 2) bp.push_back(b);
    bp.push_back(Wth);
    for (int side = -1; side <= 1; side += 2)
      for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
        const double a = bp[p], b = bp[p + 1];
        for (int i = 0; i < q.fine_order; ++i) {
          const double d = a + (b - a) * g.x[i];
          R.delta.push_back(side * d);
          R.weight.push_back((b - a) * g.w[i] * window_cutoff(d / Wth));
        }
      }
    R.card.resize(static_cast<Eigen::Index>(R.delta.size()), M);
    for (std::size_t f = 0; f < R.delta.size(); ++f)
      for (int m = 0; m < M; ++m)
        R.card(static_cast<Eigen::Index>(f), m) =
            cardinal(M, R.delta[f] - m * dth);
  }

  // Upsampling tables for off-boundary targets, keyed by factor p.
  auto upsample_factor = [&](const LagTarget& t) {
    if (t.node >= 0) return 1;
    const double p = std::ceil(q.upsample_factor * h / std::max(t.dist, 1e-300));
    return static_cast<int>(std::clamp(p, 1.0, double(q.upsample_max)));
  };

  parallel_for(static_cast<std::size_t>(T), workers, [&](std::size_t ti) {
    const LagTarget& tg = targets[ti];
    std::vector<double> buf(static_cast<std::size_t>((steps + 1) * C * M), 0.0);
    std::vector<double> om(static_cast<std::size_t>(C * M));
    double val[2];
    auto scatter = [&](const TauNode& node) {
      const double w0 = node.weight * (1 - node.lambda),
                   w1 = node.weight * node.lambda;
      double* b0 = &buf[static_cast<std::size_t>(node.lag * C * M)];
      for (int i = 0; i < C * M; ++i) b0[i] += w0 * om[i];
      if (node.lag + 1 <= steps) {
        double* b1 = &buf[static_cast<std::size_t>((node.lag + 1) * C * M)];
        for (int i = 0; i < C * M; ++i) b1[i] += w1 * om[i];
      }
    };

    if (tg.node >= 0) {
      const int i0 = tg.node;
      const double th0 = nodes.theta[i0];
      for (std::size_t k = 0; k < tn.size(); ++k) {
        const double tau = tn[k].tau;
        std::fill(om.begin(), om.end(), 0.0);
        const LocalRule& R = rules[k];
        for (int m = 0; m < M; ++m) {
          const double wgt = R.local ? (1 - chi_off[m]) : 1.0;
          if (wgt == 0.0) continue;
          const int j = (i0 + m) % M;
          eval_kernel(kind, tg, src[j], tau, q.strip_refine, val);
          for (int c = 0; c < C; ++c)
            om[c * M + j] += wgt * val[c] * nodes.weight[j];
        }
        if (R.local) {
          for (std::size_t f = 0; f < R.delta.size(); ++f) {
            double sp;
            const SourcePoint Q = source_at(curve, th0 + R.delta[f], &sp);
            eval_kernel(kind, tg, Q, tau, q.strip_refine, val);
            const double wf = R.weight[f] * sp;
            for (int m = 0; m < M; ++m) {
              const double cm = R.card(static_cast<Eigen::Index>(f), m);
              const int j = (i0 + m) % M;
              for (int c = 0; c < C; ++c) om[c * M + j] += wf * val[c] * cm;
            }
          }
        }
        scatter(tn[k]);
      }
    } else {
      const int p = upsample_factor(tg);
      const int F = p * M;
      std::vector<SourcePoint> fs(static_cast<std::size_t>(F));
      std::vector<double> fw(static_cast<std::size_t>(F));
      for (int f = 0; f < F; ++f) {
        double sp;
        fs[f] = source_at(curve, 2 * kPi * f / F, &sp);
        fw[f] = 2 * kPi / F * sp;
      }
      // card(r, k) = L(2 pi (k + r/p) / M)
      Eigen::MatrixXd card(p, M);
      for (int r = 0; r < p; ++r)
        for (int k = 0; k < M; ++k)
          card(r, k) = cardinal(M, dth * (k + static_cast<double>(r) / p));
      std::vector<double> kv(static_cast<std::size_t>(F * C));
      for (std::size_t k = 0; k < tn.size(); ++k) {
        const double tau = tn[k].tau;
        for (int f = 0; f < F; ++f) {
          eval_kernel(kind, tg, fs[f], tau, q.strip_refine, val);
          for (int c = 0; c < C; ++c) kv[f * C + c] = val[c] * fw[f];
        }
        std::fill(om.begin(), om.end(), 0.0);
        if (p == 1) {
          for (int j = 0; j < M; ++j)
            for (int c = 0; c < C; ++c) om[c * M + j] = kv[j * C + c];
        } else {
          for (int f = 0; f < F; ++f) {
            const int jj = f / p, r = f % p;
            for (int m = 0; m < M; ++m) {
              const int kk = ((jj - m) % M + M) % M;
              const double cm = card(r, kk);
              for (int c = 0; c < C; ++c) om[c * M + m] += kv[f * C + c] * cm;
            }
          }
        }
        scatter(tn[k]);
      }
    }
    for (int m = 0; m <= steps; ++m)
      for (int c = 0; c < C; ++c)
        for (int j = 0; j < M; ++j)
          op.lag(m)(static_cast<Eigen::Index>(ti * C + c), j) =
              buf[static_cast<std::size_t>((m * C + c) * M + j)];
  });
  return op;
}

std::vector<Vec2> hydro_potential_U(const Eigen::MatrixXd& phi,
                                    const BoundaryCurve& curve,
                                    const CurveNodes& nodes, Vec2 x, double dt,
                                    const SpaceTimeQuadrature& q) {
  const int K = static_cast<int>(phi.cols());
  if (K < 2) throw InvalidInput("density needs >= 2 time levels");
  const auto op =
      assemble_lag_operator(KernelKind::StokesTangential, curve, nodes,
                            point_targets(curve, {x}), dt, K - 1, q, 1);
  const Eigen::MatrixXd v = op.apply(phi);
  std::vector<Vec2> out(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) out[k] = {v(0, k), v(1, k)};
  return out;
}

Eigen::MatrixXd boundary_U(const Eigen::MatrixXd& phi,
                           const BoundaryCurve& curve, const CurveNodes& nodes,
                           double dt, const SpaceTimeQuadrature& q) {
  const int K = static_cast<int>(phi.cols());
  if (K < 2) throw InvalidInput("density needs >= 2 time levels");
  const auto op = assemble_lag_operator(KernelKind::StokesTangential, curve,
                                        nodes, node_targets(nodes), dt, K - 1,
                                        q);
  return op.apply(phi);
}

}  // namespace dstokes

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dstokes/curve.hpp"
#include "dstokes/field.hpp"

namespace dstokes {

/// Constant in K*[psi](P) = c_n p.v. int (P-Q).n(P) / |P-Q|^2 psi(Q) dQ.
inline constexpr double kKstarConstant = -1.0 / kPi;
/// Interior normal derivative of the single layer: d_n V^- = j (I + K*) psi.
inline constexpr double kNeumannJump = -0.5;

// ---- Laplace single layer ------------------------------------------------------

/// Trapezoidal single layer at an off-boundary point. Sets *near when x lies
/// within one node spacing of the boundary.
double single_layer_V(const std::vector<double>& psi, const CurveNodes& n,
                      Vec2 x, bool* near = nullptr);
Vec2 grad_single_layer_V(const std::vector<double>& psi, const CurveNodes& n,
                         Vec2 x, bool* near = nullptr);

/// On-boundary single layer by the logarithmic product rule (even M).
std::vector<double> single_layer_boundary(const std::vector<double>& psi,
                                          const CurveNodes& n);

/// Periodic spectral differentiation in theta.
Eigen::MatrixXd spectral_derivative_matrix(int M);

/// Nodal matrix of K* (constant c_n included, curvature limit on diagonal).
Eigen::MatrixXd kstar_matrix(const CurveNodes& n);
std::vector<double> kstar(const std::vector<double>& psi, const CurveNodes& n);

/// Nodal matrix of the tangential derivative of V along the unit tangent.
Eigen::MatrixXd tangential_grad_matrix(const CurveNodes& n);
std::vector<double> tangential_grad_S_V(const std::vector<double>& psi,
                                        const CurveNodes& n);

// ---- pressure tensor and Green tensor --------------------------------------------

/// Local frame of a boundary point Q.
struct SourcePoint {
  Vec2 pos;
  Vec2 tangent;
  Vec2 normal;
};

/// Scaled strip integral: returns q-hat (components along tangent, normal)
/// and its derivative in a-hat, where a-hat, b-hat are the tangential and
/// normal offsets of x from Q divided by sqrt(t).
struct StripValue {
  Vec2 q;     // (tangent, normal) components
  Vec2 dq_a;  // d/da-hat
};
StripValue pressure_strip(double a_hat, double b_hat, int refine = 1);

/// q(x,Q,t) in global coordinates.
Vec2 pressure_tensor_q(Vec2 x, const SourcePoint& Q, double t, int refine = 1);
/// (tangent . grad_x) q(x,Q,t) in global coordinates.
Vec2 pressure_tensor_dq(Vec2 x, const SourcePoint& Q, double t,
                        int refine = 1);

/// G = -2 d_nQ Gamma (I - n n) + 4 (grad_x q) (I - n n), 2x2.
Mat2 green_tensor_G(Vec2 x, const SourcePoint& Q, double t);
/// G(x,Q,t) applied to the unit tangent at Q.
Vec2 green_tangent_column(Vec2 x, const SourcePoint& Q, double t);

// ---- space-time boundary operators ---------------------------------------------

enum class KernelKind {
  HeatDoubleLayer,        // d_{n_Q} Gamma(x-Q)
  HeatSingleLayer,        // Gamma(x-Q)
  HeatNormalSingleLayer,  // n_x . grad_x Gamma(x-Q)
  StokesTangential        // G(x,Q) tangent(Q), two components
};
int kernel_components(KernelKind k);
/// Coefficient c of the interior limit: lim_{x->P} K[mu](x) = c mu(P) + direct.
double interior_jump(KernelKind k);

struct LagTarget {
  Vec2 x;
  Vec2 normal;    // used by HeatNormalSingleLayer
  int node = -1;  // boundary node index, or -1 for an off-boundary point
  double dist = 0;
};

/// Targets at every boundary node.
std::vector<LagTarget> node_targets(const CurveNodes& n);
/// Off-boundary targets; distances computed from the curve.
std::vector<LagTarget> point_targets(const BoundaryCurve& c,
                                     const std::vector<Vec2>& pts);

struct SpaceTimeQuadrature {
  int first_panels = 4;   // panels of the sigma^4 rule on the first step
  int first_order = 6;
  int near_order = 6;     // Gauss nodes on steps 1..near_steps
  int near_steps = 3;
  int far_order = 3;      // Gauss nodes on later steps
  double local_threshold = 3.0;  // local rule when sqrt(tau) < thr * h
  int window_nodes = 12;         // half width of the local window
  int fine_order = 8;
  int upsample_max = 32;
  double upsample_factor = 5.0;  // upsample until h/p <= dist/factor
  int strip_refine = 1;
};

/// Convolution weights on a uniform time grid with piecewise-linear
/// densities: value(target, t_n) = sum_{m=0..n} W[m] * mu(:, n-m).
class LagOperator {
 public:
  LagOperator() = default;
  LagOperator(int targets, int comps, int nodes, int steps, double dt);

  int targets() const { return targets_; }
  int comps() const { return comps_; }
  int nodes() const { return nodes_; }
  int steps() const { return steps_; }
  double dt() const { return dt_; }
  /// (targets*comps) x nodes, row = target*comps + comp.
  Eigen::MatrixXd& lag(int m) { return W_[static_cast<std::size_t>(m)]; }
  const Eigen::MatrixXd& lag(int m) const {
    return W_[static_cast<std::size_t>(m)];
  }

  /// mu: nodes x (n_times) columns at t_0..t_K. Returns rows x n_times with
  /// column n = sum_{m<=n} W[m] mu(:, n-m). Lags beyond `max_lag` ignored.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& mu, int max_lag = -1) const;

 private:
  int targets_ = 0, comps_ = 0, nodes_ = 0, steps_ = 0;
  double dt_ = 0;
  std::vector<Eigen::MatrixXd> W_;
};

LagOperator assemble_lag_operator(KernelKind kind, const BoundaryCurve& curve,
                                  const CurveNodes& nodes,
                                  const std::vector<LagTarget>& targets,
                                  double dt, int steps,
                                  const SpaceTimeQuadrature& q = {},
                                  int workers = 0);

/// Tangential densities phi (Phi = phi * tangent) on nodes x times.
/// Hydrodynamic potential at an off-boundary point for every grid time.
std::vector<Vec2> hydro_potential_U(const Eigen::MatrixXd& phi,
                                    const BoundaryCurve& curve,
                                    const CurveNodes& nodes, Vec2 x, double dt,
                                    const SpaceTimeQuadrature& q = {});
/// Direct boundary value U[Phi] at every node and grid time, (2M) x times.
Eigen::MatrixXd boundary_U(const Eigen::MatrixXd& phi,
                           const BoundaryCurve& curve, const CurveNodes& nodes,
                           double dt, const SpaceTimeQuadrature& q = {});

}  // namespace dstokes

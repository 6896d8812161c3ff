#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dstokes/common.hpp"
#include "dstokes/field.hpp"

namespace dstokes {

/// (rho, theta, u) on the unit square with n x n cells. Scalars are cell
/// centred, index j*n + i. u lives on a staggered grid: ux at x-faces
/// (i h, (j+1/2) h), index j*(n+1) + i; uy at y-faces ((i+1/2) h, j h),
/// index j*n + i. Boundary faces carry zero normal velocity.
struct StateTriple {
  int n = 0;
  double time = 0;
  std::vector<double> rho, theta, ux, uy;

  static StateTriple zero(int n, double time = 0);
  double h() const { return 1.0 / n; }
  Vec2 cell(int i, int j) const { return {(i + 0.5) / n, (j + 0.5) / n}; }
  Vec2 velocity_at_cell(int i, int j) const;
  /// max |discrete divergence| over cells
  double max_divergence() const;
  bool finite() const;
  double mass() const;  // h^2 sum rho
};

using Trajectory = std::vector<StateTriple>;

/// Nonlinearities F(rho, theta, grad theta, u), f(...), G(...); the first
/// argument is the position (for external potentials). Empty: zero.
struct NonlinearRHS {
  std::function<Vec2(Vec2, double, double, Vec2, Vec2)> F, G;
  std::function<double(Vec2, double, double, Vec2, Vec2)> f;
  int growth_l = 1;
  std::string name = "custom";
};

struct GrowthCheck {
  double C = 0;       // sup (|f|+|F|+|G|) / (1+|x|+|y|+|z|+|w|)^l
  double C_grad = 0;  // same for the Jacobian with exponent l-1
  double C_inner = 0, C_grad_inner = 0;  // same over magnitudes <= 10
  bool bounded = false;  // outer constants within 2x of the inner ones
};

/// Random-sample fit of the polynomial growth constants (magnitudes up to 1e3).
GrowthCheck check_growth(const NonlinearRHS& rhs, int samples = 4000, std::uint64_t seed = 7);

/// chi, k >= 0 and nondecreasing with k(0) = 0. n <-> rho, c <-> theta:
/// F = -chi(c) n grad c, f = -k(c) n, G = -n grad phi. Throws HypothesisViolation.
NonlinearRHS keller_segel_instance(const std::function<double(double)>& chi,
                                   const std::function<double(double)>& k,
                                   const std::function<Vec2(Vec2)>& grad_phi);

struct CoupledData {
  std::function<double(Vec2)> rho0, theta0;  // empty: zero
  std::function<Vec2(Vec2)> u0;              // empty: zero; projected onto div-free
};

struct CoupledOptions {
  int n = 64;
  int steps = 20;
  double tol = 1e-10;    // relative X^alpha difference
  int max_iter = 40;
  double alpha = 0.5;
  double min_T = 1e-4;
  bool freeze_rho = false, freeze_theta = false, freeze_u = false;  // keep initial data
};

/// Samples the data; u0 is projected and the projection change returned in *u0_defect.
StateTriple initial_state(const CoupledData& d, int n, double* u0_defect = nullptr);

/// One Picard step: three linear backward-Euler solves on the time grid of
/// `prev` with sources lagged from `prev` (no-flux, no-flux, no-slip).
/// `linear_only` drops every source (the first iterate).
Trajectory picard_step(const Trajectory& prev, const NonlinearRHS& rhs,
                       const CoupledOptions& opt, bool linear_only = false);

/// Sum of parabolic norms (screened) of rho, theta, grad theta and u at cell centres.
double trajectory_norm(const Trajectory& tr, double alpha);
double trajectory_difference(const Trajectory& a, const Trajectory& b, double alpha);

struct IterationReport {
  double T = 0;                      // horizon actually solved
  std::vector<double> T_tried;
  std::vector<double> norms;         // X^alpha norm per iterate
  std::vector<double> differences;   // successive differences
  std::vector<double> ratios;
  double data_norm = 0;              // ||(rho0, theta0, u0)||, the M0 bookkeeping
  double u0_defect = 0;
  int iterations = 0;
  bool converged = false;
  double contraction() const;        // geometric mean of ratios after the first
  /// sqrt(d_{k+2} / d_k) from the second difference on, over differences
  /// above 1e-12 of the final norm. rho and theta feed each other with a
  /// one-iteration lag, which modulates single-step ratios with period two.
  std::vector<double> two_step_ratios() const;
  /// max |q_{k+1}/q_k - 1| over two_step_ratios.
  double ratio_quotient_deviation() const;
  /// Same over single-step ratios after the first.
  double raw_ratio_quotient_deviation() const;
};

struct CoupledSolution {
  Trajectory trajectory;
  IterationReport report;
};

/// Picard iteration to tol; halves T on non-contraction down to min_T, then
/// throws StiffnessError.
CoupledSolution solve_coupled(const CoupledData& data, const NonlinearRHS& rhs, double T,
                              const CoupledOptions& opt = {});

struct ConservationReport {
  std::vector<double> mass_drift;    // |m(t) - m(0)| / m(0) per time level
  double mass_drift_rate = 0;        // max over t > 0 of drift / t
  double max_principle_excess = 0;   // max(0, max theta(t) - max theta(0))
  double max_divergence = 0;
  double min_rho = 0;
};

ConservationReport conservation_monitors(const Trajectory& tr);

/// Cell-centred samples of one state component: "rho", "theta", "u" (2 comps).
SampledField trajectory_field(const Trajectory& tr, const std::string& what);

}  // namespace dstokes

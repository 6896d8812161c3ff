#pragma once

#include <Eigen/Dense>
#include <functional>

#include "dstokes/helmholtz.hpp"
#include "dstokes/layer_potentials.hpp"

namespace dstokes {

/// v_t - Lap v = f + div F in the domain, v(., 0) = v0, with Dirichlet data
/// v = g or Neumann data d_n v = g on the boundary.
struct HeatProblem {
  BoundaryCurve curve = BoundaryCurve::circle(1.0);
  std::function<double(Vec2)> v0;                 // empty: zero
  std::function<double(Vec2, double)> g;          // empty: zero
  std::function<double(Vec2, double)> f;          // empty: zero
  std::function<void(Vec2, double, double*)> F;   // empty: zero; (F1, F2)
  double T = 1.0;
  bool neumann = false;
};

struct HeatSolveOptions {
  int M = 128;
  int steps = 64;
  /// Periodic box for the whole-space potentials; size <= 0 selects a box
  /// of 4 diam centred on the domain.
  BoxSpec box{{0, 0}, 0.0, 128};
  SpaceTimeQuadrature quadrature;
  int workers = 0;
};

struct HeatSolution {
  std::vector<double> times;
  SampledField u;             // targets x times
  Eigen::MatrixXd density;    // M x (steps + 1)
  double compatibility = 0;   // max |G(., 0)|, zero for compatible data
};

/// Box of 4 diam around the curve's bounding box (n kept from `base`).
BoxSpec default_box(const BoundaryCurve& c, const BoxSpec& base);

/// Wide cutoff with a depth-saturated C^3 reflection; keeps the spectral
/// interpolant of the extended data accurate on the default box.
ExtensionOptions smooth_extension(const BoundaryCurve& c);

/// Causal march of the second-kind Volterra equation for the boundary
/// density: heat double layer (Dirichlet) or heat single layer (Neumann),
/// on top of W(v0 extended) + Lambda_0(f) + Lambda_0(div F).
HeatSolution heat_ibvp_solve(const HeatProblem& p, const std::vector<Vec2>& targets,
                             const HeatSolveOptions& opt = {});

}  // namespace dstokes

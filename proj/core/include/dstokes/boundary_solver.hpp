#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "dstokes/heat_ibvp.hpp"
#include "dstokes/holder_norms.hpp"
#include "dstokes/layer_potentials.hpp"

namespace dstokes {

/// u_t - Lap u + grad p = f + div F, div u = 0 in the domain, u = g on the
/// boundary, u(., 0) = u0. F holds (F11, F12, F21, F22), (div F)_k = d_j F_kj.
struct StokesProblem {
  BoundaryCurve curve = BoundaryCurve::circle(1.0);
  std::function<Vec2(Vec2)> u0;                  // empty: zero
  std::function<Vec2(Vec2, double)> g;           // empty: zero
  std::function<Vec2(Vec2, double)> f;           // empty: zero
  std::function<void(Vec2, double, double*)> F;  // empty: zero
  double T = 1.0;
  double alpha = 0.5;
  DiniModulus eta = DiniModulus::log_power(2.0);
};

struct CompatibilityReport {
  double divergence = 0;  // max |div u0| at interior sample points
  double trace = 0;       // max |u0 - g(., 0)| on the boundary
  double flux = 0;        // max_t |int g . n|
  bool pass = true;
};

/// Residuals of div u0 = 0, u0 = g(., 0) on the boundary, zero net flux.
CompatibilityReport check_compatibility(const StokesProblem& p, int M = 128,
                                        int steps = 64);

/// Boundary operators on a uniform time grid, reused by every slab and solve.
struct StokesBoundaryOperators {
  BoundaryCurve curve = BoundaryCurve::circle(1.0);
  CurveNodes nodes;
  double dt = 0;
  int steps = 0;
  std::vector<Eigen::MatrixXd> U_tan;  // tangent . U, per lag, M x M
  std::vector<Eigen::MatrixXd> U_nor;  // normal . U, per lag, M x M
  Eigen::MatrixXd grad_s;              // tangential gradient of V
  Eigen::MatrixXd kstar;
  Eigen::PartialPivLU<Eigen::MatrixXd> kstar_aug;  // I + K* + 1 w^T / |dOmega|
  double jump = 1.0;                   // interior jump of the hydro potential
};

StokesBoundaryOperators build_boundary_operators(const BoundaryCurve& curve, int M,
                                                 double dt, int steps,
                                                 const SpaceTimeQuadrature& q = {},
                                                 int workers = 0);

struct PicardOptions {
  double tol = 1e-9;          // relative successive difference
  int max_iter = 60;
  int inner_max = 200;        // Neumann series terms for (I + U_tan)
  double alpha = 0.5;         // exponent of the difference norm
  ScanMode mode = ScanMode::Screened;
  int workers = 0;
};

/// Densities phi (tangential component of Phi) and psi on nodes x times.
struct SpaceTimeDensity {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd psi;
};

struct SlabSolution {
  int first = 0, last = 0;                 // time indices, unknowns on (first, last]
  Eigen::MatrixXd phi, psi;                // M x (last - first)
  std::vector<double> differences;         // successive differences
  std::vector<double> contraction_ratios;  // differences[k+1] / differences[k]
  double residual = 0;                     // max boundary-equation residual
  int iterations = 0;
  /// Contraction estimate: geometric mean of the ratios after the first.
  double contraction() const;
};

/// Alternating Picard iteration on one slab. g_tan, g_nor: M x (steps + 1)
/// data; hist holds the densities at indices <= first (later columns are
/// ignored). Throws ContractionFailure when the iteration does not contract.
SlabSolution solve_slab(const StokesBoundaryOperators& ops, const Eigen::MatrixXd& g_tan,
                        const Eigen::MatrixXd& g_nor, const SpaceTimeDensity& hist,
                        int first, int last, const PicardOptions& opt = {});

/// Single slab [0, slab_T] for boundary data g (nodes x times, 2 components,
/// times uniform from 0). Operators are built for the given nodes count.
SlabSolution solve_boundary_system(const SampledField& g, const BoundaryCurve& curve,
                                   double slab_T, const PicardOptions& opt = {},
                                   const SpaceTimeQuadrature& q = {});

struct ContinuationResult {
  SpaceTimeDensity density;
  std::vector<SlabSolution> slabs;
  std::vector<double> slab_lengths;
  double max_joint_residual = 0;
};

/// Chains slabs of at most slab_steps steps over the whole grid; a slab that
/// fails to contract is halved and retried.
ContinuationResult continue_in_time(const StokesBoundaryOperators& ops,
                                    const Eigen::MatrixXd& g_tan, const Eigen::MatrixXd& g_nor,
                                    int slab_steps, const PicardOptions& opt = {},
                                    double joint_tol = 1e-6);

/// Boundary residual of the discrete system for a density on the full grid:
/// M x (steps + 1) for each row block (tangential, normal).
double boundary_residual(const StokesBoundaryOperators& ops, const SpaceTimeDensity& d,
                         const Eigen::MatrixXd& g_tan, const Eigen::MatrixXd& g_nor);

/// u = U[Phi] + grad V[Psi] at interior targets, 2 components. *near_count
/// receives the number of targets within one node spacing of the boundary.
SampledField assemble_interior(const SpaceTimeDensity& d, const StokesBoundaryOperators& ops,
                               const std::vector<Vec2>& targets,
                               const SpaceTimeQuadrature& q = {}, int workers = 0,
                               int* near_count = nullptr);

struct StokesSolveOptions {
  int M = 128;
  int steps = 64;
  double slab_T = 0.0;   // <= 0: whole horizon first, halved on failure
  BoxSpec box{{0, 0}, 0.0, 128};
  SpaceTimeQuadrature quadrature;
  PicardOptions picard;
  int workers = 0;
};

struct SolveReport {
  CompatibilityReport compatibility;
  double initial_mismatch = 0;      // max |G(., 0)|
  double boundary_residual = 0;
  std::vector<double> slab_lengths;
  std::vector<double> contraction;  // per slab
  int iterations = 0;
  int near_targets = 0;
  // norms entering the a priori estimate
  double norm_u = 0;
  double norm_u0 = 0, norm_f = 0, norm_F = 0, norm_g = 0, mixed_g_normal = 0;
  double rhs_bundle() const { return norm_u0 + norm_f + norm_F + norm_g + mixed_g_normal; }
  double estimate_ratio() const;
  double seconds = 0;
};

struct StokesSolution {
  std::vector<double> times;
  SampledField u;  // targets x times, 2 components
  SpaceTimeDensity density;
  SolveReport report;
};

/// u = V1 + V2 + v + w with v the heat evolution of a divergence-free
/// extension of u0 and w = U[Phi] + grad V[Psi] matching G = g - V1 - V2 - v.
StokesSolution solve_stokes_ibvp(const StokesProblem& p, const std::vector<Vec2>& targets,
                                 const StokesSolveOptions& opt = {});

/// Test field (D_y chi, -D_x chi) on the tensor grid xs x ys by centred
/// differences of the stream function chi, so its centred-difference
/// divergence vanishes to rounding. Edge nodes are set to zero.
SampledField divergence_free_test_field(const std::vector<double>& xs,
                                        const std::vector<double>& ys,
                                        const std::vector<double>& times,
                                        const std::function<double(Vec2, double)>& chi);

/// Velocity and test field on one tensor grid (same points and times).
/// Returns |int int grad u : grad Phi - int int (u . Phi_t + f . Phi - F : grad Phi)|
/// by trapezoid sums with centred differences. f, F may be empty.
/// Throws InvalidInput when Phi is not discretely divergence-free.
double weak_residual(const SampledField& u, const SampledField& test,
                     const std::function<Vec2(Vec2, double)>& f = {},
                     const std::function<void(Vec2, double, double*)>& F = {},
                     double div_tol = 1e-6);

}  // namespace dstokes

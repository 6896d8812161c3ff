#pragma once

#include <functional>
#include <vector>

#include "dstokes/field.hpp"

namespace dstokes {

struct KernelPoint {
  Vec2 x;
  double t = 1.0;
};

struct QuadratureConfig {
  /// Gaussian window half-width in standard deviations.
  double gaussian_cutoff_sigmas = 8.0;
  /// Spatial quadrature points per unit length of the physical window.
  double space_resolution = 64.0;
  /// Gauss nodes per panel (space and time).
  int time_rule = 6;
  /// Geometric grading levels of the time rule towards the singular end.
  int time_levels = 12;
  double tolerance = 1e-8;

  void validate() const;
};

/// (4 pi t)^{-1} exp(-|x|^2 / 4t)
double eval_gamma(KernelPoint p);
Vec2 eval_grad_gamma(KernelPoint p);
double eval_dt_gamma(KernelPoint p);

/// N(x) = ln|x| / (2 pi), Laplacian N = delta.
double eval_newtonian(Vec2 x);
Vec2 eval_grad_newtonian(Vec2 x);

using SpaceFn = std::function<double(Vec2)>;
using SpaceTimeFn = std::function<double(Vec2, double)>;

/// Bilinear-in-space, linear-in-time interpolant of a field sampled on a
/// tensor grid (points ordered x-major or y-major); zero outside the box.
class GridInterpolant {
 public:
  explicit GridInterpolant(const SampledField& f);
  double operator()(Vec2 y, double s, int component = 0) const;
  int components() const { return field_.components(); }
  const SampledField& field() const { return field_; }

 private:
  SampledField field_;
  std::vector<double> xs_, ys_;
  std::vector<std::size_t> index_;  // (ix, iy) -> point index
  double value(std::size_t ix, std::size_t iy, double s, int c) const;
};

/// W(x,t) = int Gamma(x-z,t) u0(z) dz; W(x,0) = u0(x).
double initial_potential_W(const SpaceFn& u0, Vec2 x, double t,
                           const QuadratureConfig& cfg = {});
std::vector<double> initial_potential_W(const SampledField& u0, Vec2 x,
                                        double t,
                                        const QuadratureConfig& cfg = {});
/// grad_x W(x,t) for the stream-function route of divergence-free data.
Vec2 grad_initial_potential_W(const SpaceFn& u0, Vec2 x, double t,
                              const QuadratureConfig& cfg = {});

/// Lambda_0(f)(x,t) = int_0^t int Gamma(x-y,t-s) f(y,s) dy ds.
double volume_potential_L0(const SpaceTimeFn& f, Vec2 x, double t,
                           const QuadratureConfig& cfg = {});
std::vector<double> volume_potential_L0(const SampledField& f, Vec2 x,
                                        double t,
                                        const QuadratureConfig& cfg = {});

/// grad_x Lambda_0(f)(x,t).
Vec2 grad_volume_potential(const SpaceTimeFn& f, Vec2 x, double t,
                           const QuadratureConfig& cfg = {});

/// Solution at (x,t) of w_t - Lap w = div F, w(.,0) = 0, for a vector
/// F = (F1, F2): sum_k d_{x_k} Lambda_0(F_k).
double div_form_potential(const SpaceTimeFn& F1, const SpaceTimeFn& F2,
                          Vec2 x, double t, const QuadratureConfig& cfg = {});
/// Row-wise version for a 2x2 tensor field stored as components
/// (F11, F12, F21, F22): returns (div row 1, div row 2).
Vec2 div_form_potential(const SampledField& F, Vec2 x, double t,
                        const QuadratureConfig& cfg = {});

}  // namespace dstokes

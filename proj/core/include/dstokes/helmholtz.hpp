#pragma once

#include <complex>
#include <functional>
#include <mutex>
#include <vector>

#include "dstokes/curve.hpp"
#include "dstokes/field.hpp"

namespace dstokes {

/// Square periodic box [center - size/2, center + size/2)^2 with n nodes
/// per axis at lo + i * size / n.
struct BoxSpec {
  Vec2 center;
  double size = 8.0;
  int n = 128;

  double h() const { return size / n; }
  Vec2 lo() const { return center - Vec2{0.5 * size, 0.5 * size}; }
  void validate() const;
};

/// Values on the periodic box nodes for a list of times.
/// Index ((iy * n + ix) * T + t) * C + c, matching SampledField.
class PeriodicGridField {
 public:
  PeriodicGridField() = default;
  PeriodicGridField(BoxSpec box, std::vector<double> times, int components);

  const BoxSpec& box() const { return box_; }
  int n() const { return box_.n; }
  std::size_t n_cells() const { return static_cast<std::size_t>(box_.n) * box_.n; }
  const std::vector<double>& times() const { return times_; }
  int components() const { return components_; }

  Vec2 node(int ix, int iy) const;
  double& at(int ix, int iy, std::size_t t, int c = 0) {
    return values_[((static_cast<std::size_t>(iy) * box_.n + ix) * times_.size() + t) *
                       components_ + c];
  }
  double at(int ix, int iy, std::size_t t, int c = 0) const {
    return values_[((static_cast<std::size_t>(iy) * box_.n + ix) * times_.size() + t) *
                       components_ + c];
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// Per (time, component) means, refreshed by update_means().
  double mean(std::size_t t, int c) const { return means_[t * components_ + c]; }
  void update_means();

  /// Copy of one (time, component) slice, row-major in (iy, ix).
  std::vector<double> slice(std::size_t t, int c) const;
  void set_slice(std::size_t t, int c, const std::vector<double>& v);

  /// All nodes as a SampledField (for norms and CSV output).
  SampledField to_sampled() const;

  static PeriodicGridField from_function(
      BoxSpec box, std::vector<double> times, int components,
      const std::function<void(Vec2, double, double*)>& f);

 private:
  BoxSpec box_;
  std::vector<double> times_;
  int components_ = 1;
  std::vector<double> values_;
  std::vector<double> means_;
};

struct ExtensionOptions {
  /// Width of the tubular neighbourhood over which the nearest-point value
  /// is cut off to zero; <= 0 selects 0.1 * diam.
  double width = 0.0;
  /// Blend towards the boundary mean of f instead of towards zero, so that
  /// constants extend to constants.
  bool anchor_mean = false;
  /// Replace the nearest-point value by the reflection
  /// sum_j a_j f(P - d j / (k + 1)), j = 1..k+1, with a_j chosen so the
  /// extension is C^k across the boundary (k = 1: 4 f(P - d/2) - 3 f(P - d)).
  /// Falls back to the nearest-point value where the reflected points leave
  /// the domain.
  bool reflect = false;
  int reflect_order = 1;
  /// Largest reflection depth: the offset is passed through a smooth
  /// saturation (identity below 2/3 of this value); <= 0 means no cap.
  double reflect_depth = 0.0;
};

/// Nearest-boundary-point constant extension of f (defined on the closed
/// domain) times a smooth cutoff of the distance, sampled on the box.
PeriodicGridField extend_to_box(
    const std::function<void(Vec2, double, double*)>& f, int components,
    const std::vector<double>& times, const BoundaryCurve& curve,
    const BoxSpec& box, const ExtensionOptions& opt = {});
/// Same for a field sampled on a tensor grid covering the closed domain.
PeriodicGridField extend_to_box(const SampledField& f,
                                const BoundaryCurve& curve, const BoxSpec& box,
                                const ExtensionOptions& opt = {});

/// Weights a_j of the order-k reflection (see ExtensionOptions::reflect).
std::vector<double> reflection_coefficients(int order);

/// Serialises FFTW planner calls across the library.
std::mutex& fftw_plan_mutex();

/// Smooth cutoff: 1 at u <= 0, 0 at u >= 1.
double extension_cutoff(double u);

/// Leray projection, multiplier delta_ij - xi_i xi_j / |xi|^2 (zero mode
/// unchanged, Nyquist modes removed). Requires two components.
PeriodicGridField leray_project(const PeriodicGridField& f, int workers = 0);

/// Riesz transform along axis (0 or 1), multiplier -i xi_axis / |xi|,
/// applied to every component; zero and Nyquist modes map to 0.
PeriodicGridField riesz(int axis, const PeriodicGridField& f, int workers = 0);

/// Fourier coefficients of the periodic heat evolution, one block of n^2
/// modes per (time, component).
class PeriodicSpectrum {
 public:
  PeriodicSpectrum() = default;
  PeriodicSpectrum(BoxSpec box, std::vector<double> times, int components);

  const BoxSpec& box() const { return box_; }
  const std::vector<double>& times() const { return times_; }
  int components() const { return components_; }
  std::complex<double>* block(std::size_t t, int c) {
    return &coef_[(t * components_ + c) * n2()];
  }
  const std::complex<double>* block(std::size_t t, int c) const {
    return &coef_[(t * components_ + c) * n2()];
  }

  /// Trigonometric interpolant at arbitrary points for every time.
  /// Nyquist modes are dropped.
  SampledField evaluate(const std::vector<Vec2>& targets, int workers = 0) const;
  /// Spatial gradient of component c at the points: 2 output components.
  SampledField evaluate_gradient(const std::vector<Vec2>& targets, int c,
                                 int workers = 0) const;
  /// Back to grid values.
  PeriodicGridField to_grid(int workers = 0) const;

 private:
  BoxSpec box_;
  std::vector<double> times_;
  int components_ = 0;
  std::vector<std::complex<double>> coef_;
  std::size_t n2() const { return static_cast<std::size_t>(box_.n) * box_.n; }
};

/// Normalised forward transform: f(x) = sum_k c_k exp(i xi_k . (x - lo)).
PeriodicSpectrum to_spectrum(const PeriodicGridField& f, int workers = 0);

/// Solution at the field's times of w_t - Lap w = source, w(0) = 0, on the
/// periodic box, source piecewise linear in time (exact per mode).
PeriodicSpectrum periodic_heat_potential(const PeriodicSpectrum& source);

/// Free periodic heat evolution of the first time slice of u0, reported at
/// `times` (measured from 0).
PeriodicSpectrum periodic_heat_semigroup(const PeriodicGridField& u0,
                                         const std::vector<double>& times,
                                         int workers = 0);

/// V1 = Lambda_0(P f): f two components.
PeriodicSpectrum build_V1_spectrum(const PeriodicGridField& f_ext, int workers = 0);
SampledField build_V1(const PeriodicGridField& f_ext,
                      const std::vector<Vec2>& targets, int workers = 0);

/// V2 solves w_t - Lap w = P div F, where (div F)_k = sum_j d_j F_kj and
/// F has components (F11, F12, F21, F22).
PeriodicSpectrum build_V2_spectrum(const PeriodicGridField& F_ext, int workers = 0);
SampledField build_V2(const PeriodicGridField& F_ext,
                      const std::vector<Vec2>& targets, int workers = 0);

}  // namespace dstokes

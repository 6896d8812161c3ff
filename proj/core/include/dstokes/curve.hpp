#pragma once

#include <string>
#include <vector>

#include "dstokes/common.hpp"

namespace dstokes {

/// Node data of a curve discretized at M uniform parameter values.
struct CurveNodes {
  int M = 0;
  std::vector<double> theta;
  std::vector<Vec2> pos;
  std::vector<Vec2> tangent;  // unit
  std::vector<Vec2> normal;   // outward unit
  std::vector<double> speed;  // |gamma'|
  std::vector<double> curvature;
  std::vector<double> weight;  // trapezoid weights 2 pi / M * speed
  double length = 0;
  double h() const { return length / M; }
};

/// Smooth closed curve gamma(theta), theta in [0, 2 pi), stored as a
/// truncated Fourier series and oriented counterclockwise.
class BoundaryCurve {
 public:
  static BoundaryCurve circle(double R, Vec2 center = {});
  static BoundaryCurve ellipse(double a, double b);
  /// r(theta) = R (1 + eps cos(k theta))
  static BoundaryCurve star(int k, double eps, double R = 1.0);
  /// Trigonometric interpolant of samples at uniform parameters.
  static BoundaryCurve from_samples(const std::vector<Vec2>& pts);
  /// CSV with header theta,x,y (theta uniform on [0, 2 pi)).
  static BoundaryCurve from_csv(const std::string& path);
  /// "circle R", "ellipse a b", "star k eps" or a CSV path.
  static BoundaryCurve from_spec(const std::string& spec);

  Vec2 gamma(double theta) const;
  Vec2 d1(double theta) const;
  Vec2 d2(double theta) const;
  double speed(double theta) const { return norm(d1(theta)); }
  Vec2 tangent(double theta) const;
  Vec2 normal(double theta) const;
  double curvature(double theta) const;

  CurveNodes nodes(int M) const;

  /// Throws GeometryError when the curve is not a valid C^2 Jordan curve at
  /// resolution M.
  void validate(int M = 256) const;

  bool inside(Vec2 x) const;
  /// Closest boundary parameter to x.
  double nearest_theta(Vec2 x) const;
  double distance(Vec2 x) const;
  double diameter() const;
  /// Axis-aligned bounding box (lo, hi).
  std::pair<Vec2, Vec2> bounding_box() const;
  const std::string& description() const { return description_; }

 private:
  // x(theta) = cx[0] + sum_k cx[k] cos k theta + sx[k] sin k theta
  std::vector<double> cx_, sx_, cy_, sy_;
  std::string description_;
  std::vector<Vec2> fine_;  // polygon for inside / nearest tests
  void finalize();
};

}  // namespace dstokes

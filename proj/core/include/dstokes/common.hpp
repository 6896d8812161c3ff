#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dstokes {

constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline Vec2& operator+=(Vec2& a, Vec2 b) {
  a.x += b.x;
  a.y += b.y;
  return a;
}
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
/// Rotation by +90 degrees.
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

/// 2x2 matrix, row-major.
struct Mat2 {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
};
inline Vec2 operator*(const Mat2& m, Vec2 v) {
  return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
}

// ---- error taxonomy -------------------------------------------------------

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateModulus : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DiniViolation : std::runtime_error {
  DiniViolation(const std::string& msg, std::vector<double> partial)
      : std::runtime_error(msg), partial_sums(std::move(partial)) {}
  std::vector<double> partial_sums;
};
struct ContractionFailure : std::runtime_error {
  ContractionFailure(const std::string& msg, double r)
      : std::runtime_error(msg), ratio(r) {}
  double ratio;
};
struct CompatibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContinuationError : std::runtime_error {
  ContinuationError(const std::string& msg, double j)
      : std::runtime_error(msg), jump(j) {}
  double jump;
};
struct HypothesisViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StiffnessError : std::runtime_error {
  StiffnessError(const std::string& msg, double t, std::vector<double> r)
      : std::runtime_error(msg), smallest_T(t), ratios(std::move(r)) {}
  double smallest_T;
  std::vector<double> ratios;
};

// ---- grids and quadrature -------------------------------------------------

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> geomspace(double a, double b, std::size_t n);

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Gauss-Legendre rule with n nodes on [a,b].
QuadRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite Gauss-Legendre: `panels` equal panels of `order` nodes each.
QuadRule composite_gauss(int panels, int order, double a, double b);

/// Panels refined geometrically towards `a`: breakpoints a + (b-a)*ratio^k.
QuadRule graded_gauss(int levels, int order, double a, double b,
                      double ratio = 0.5);

/// Least squares fit y = c0 + c1 x. Returns {c0, c1, r2}.
struct LineFit {
  double intercept = 0, slope = 0, r2 = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ---- parallel loop --------------------------------------------------------

/// Runs body(i) for i in [0,n) on `workers` threads with a static partition.
/// Each index must write only its own output slot.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body);

/// Process-wide default worker count (set by the CLI, default 1).
int default_workers();
void set_default_workers(int w);

}  // namespace dstokes

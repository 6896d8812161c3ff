#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dstokes/common.hpp"

namespace dstokes {

/// Values on a (point x time) tensor grid. Points are planar positions;
/// fields on a boundary store the boundary point coordinates.
class SampledField {
 public:
  SampledField() = default;
  SampledField(std::vector<Vec2> points, std::vector<double> times,
               int components);

  std::size_t n_points() const { return points_.size(); }
  std::size_t n_times() const { return times_.size(); }
  int components() const { return components_; }

  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& times() const { return times_; }

  double& at(std::size_t p, std::size_t t, int c = 0) {
    return values_[(p * times_.size() + t) * components_ + c];
  }
  double at(std::size_t p, std::size_t t, int c = 0) const {
    return values_[(p * times_.size() + t) * components_ + c];
  }
  /// Pointer to the component block of sample (p,t).
  const double* sample(std::size_t p, std::size_t t) const {
    return &values_[(p * times_.size() + t) * components_];
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// Throws InvalidInput on non-finite values or non-increasing times.
  void validate() const;

  /// Field with the same grid filled by f(point, time) -> components.
  static SampledField from_function(
      const std::vector<Vec2>& points, const std::vector<double>& times,
      int components,
      const std::function<void(Vec2, double, double*)>& f);

  SampledField& operator+=(const SampledField& o);
  SampledField& operator*=(double s);

 private:
  std::vector<Vec2> points_;
  std::vector<double> times_;
  int components_ = 1;
  std::vector<double> values_;
};

SampledField operator+(SampledField a, const SampledField& b);
SampledField operator-(SampledField a, const SampledField& b);
SampledField operator*(double s, SampledField a);

/// Max over all samples of the Euclidean norm of the component vector.
double sup_norm(const SampledField& f);

/// CSV with header x,y,t,v1[,v2...]; one row per (point, time) sample.
void write_field_csv(std::ostream& os, const SampledField& f);
void write_field_csv(const std::string& path, const SampledField& f);
SampledField read_field_csv(std::istream& is);
SampledField read_field_csv(const std::string& path);

}  // namespace dstokes

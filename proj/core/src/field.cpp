#include "dstokes/field.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace dstokes {

SampledField::SampledField(std::vector<Vec2> points, std::vector<double> times,
                           int components)
    : points_(std::move(points)),
      times_(std::move(times)),
      components_(components),
      values_(points_.size() * times_.size() *
                  static_cast<std::size_t>(std::max(components, 0)),
              0.0) {
  if (components <= 0) throw InvalidInput("component count must be positive");
}

void SampledField::validate() const {
  for (std::size_t k = 1; k < times_.size(); ++k)
    if (!(times_[k] > times_[k - 1]))
      throw InvalidInput("times must be strictly increasing");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidInput("field contains non-finite value");
}

SampledField SampledField::from_function(
    const std::vector<Vec2>& points, const std::vector<double>& times,
    int components, const std::function<void(Vec2, double, double*)>& f) {
  SampledField out(points, times, components);
  for (std::size_t p = 0; p < points.size(); ++p)
    for (std::size_t t = 0; t < times.size(); ++t)
      f(points[p], times[t], &out.at(p, t, 0));
  return out;
}

SampledField& SampledField::operator+=(const SampledField& o) {
  if (o.values_.size() != values_.size())
    throw InvalidInput("field shapes differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

SampledField& SampledField::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

SampledField operator+(SampledField a, const SampledField& b) {
  a += b;
  return a;
}
SampledField operator-(SampledField a, const SampledField& b) {
  if (a.values().size() != b.values().size())
    throw InvalidInput("field shapes differ");
  for (std::size_t i = 0; i < a.values().size(); ++i)
    a.values()[i] -= b.values()[i];
  return a;
}
SampledField operator*(double s, SampledField a) {
  a *= s;
  return a;
}

double sup_norm(const SampledField& f) {
  double m = 0;
  const int c = f.components();
  for (std::size_t p = 0; p < f.n_points(); ++p)
    for (std::size_t t = 0; t < f.n_times(); ++t) {
      const double* v = f.sample(p, t);
      double s = 0;
      for (int k = 0; k < c; ++k) s += v[k] * v[k];
      m = std::max(m, std::sqrt(s));
    }
  return m;
}

void write_field_csv(std::ostream& os, const SampledField& f) {
  os << "x,y,t";
  for (int c = 0; c < f.components(); ++c) os << ",v" << (c + 1);
  os << "\n" << std::setprecision(17);
  for (std::size_t p = 0; p < f.n_points(); ++p)
    for (std::size_t t = 0; t < f.n_times(); ++t) {
      os << f.points()[p].x << "," << f.points()[p].y << "," << f.times()[t];
      for (int c = 0; c < f.components(); ++c) os << "," << f.at(p, t, c);
      os << "\n";
    }
}

void write_field_csv(const std::string& path, const SampledField& f) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write " + path);
  write_field_csv(os, f);
}

namespace {
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}
}  // namespace

SampledField read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("empty field CSV");
  auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "x" || header[1] != "y" ||
      header[2] != "t")
    throw InvalidInput("field CSV header must be x,y,t,v1[,v2...]");
  const int nc = static_cast<int>(header.size()) - 3;

  struct Row {
    Vec2 p;
    double t;
    std::vector<double> v;
  };
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != nc + 3)
      throw InvalidInput("field CSV line " + std::to_string(lineno) +
                         ": wrong column count");
    Row r;
    try {
      r.p = {std::stod(cells[0]), std::stod(cells[1])};
      r.t = std::stod(cells[2]);
      for (int c = 0; c < nc; ++c) r.v.push_back(std::stod(cells[3 + c]));
    } catch (const std::exception&) {
      throw InvalidInput("field CSV line " + std::to_string(lineno) +
                         ": not a number");
    }
    rows.push_back(std::move(r));
  }
  // points in first-appearance order, times sorted
  std::vector<Vec2> pts;
  std::map<std::pair<double, double>, std::size_t> pidx;
  std::vector<double> times;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.p.x, r.p.y);
    if (!pidx.count(key)) {
      pidx[key] = pts.size();
      pts.push_back(r.p);
    }
    times.push_back(r.t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (pts.size() * times.size() != rows.size())
    throw InvalidInput("field CSV is not a full point x time grid");
  SampledField f(pts, times, nc);
  std::vector<char> seen(rows.size(), 0);
  for (const auto& r : rows) {
    const std::size_t p = pidx[{r.p.x, r.p.y}];
    const std::size_t t = static_cast<std::size_t>(
        std::lower_bound(times.begin(), times.end(), r.t) - times.begin());
    if (seen[p * times.size() + t])
      throw InvalidInput("field CSV has duplicate samples");
    seen[p * times.size() + t] = 1;
    for (int c = 0; c < nc; ++c) f.at(p, t, c) = r.v[c];
  }
  f.validate();
  return f;
}

SampledField read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot read " + path);
  return read_field_csv(is);
}

}  // namespace dstokes

#include "dstokes/curve.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dstokes {

namespace {

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 &&
         d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

BoundaryCurve BoundaryCurve::circle(double R, Vec2 center) {
  if (!(R > 0)) throw InvalidInput("circle radius must be positive");
  BoundaryCurve c;
  c.cx_ = {center.x, R};
  c.sx_ = {0.0, 0.0};
  c.cy_ = {center.y, 0.0};
  c.sy_ = {0.0, R};
  std::ostringstream os;
  os << "circle " << R;
  c.description_ = os.str();
  c.finalize();
  return c;
}

BoundaryCurve BoundaryCurve::ellipse(double a, double b) {
  if (!(a > 0 && b > 0)) throw InvalidInput("ellipse axes must be positive");
  BoundaryCurve c;
  c.cx_ = {0.0, a};
  c.sx_ = {0.0, 0.0};
  c.cy_ = {0.0, 0.0};
  c.sy_ = {0.0, b};
  std::ostringstream os;
  os << "ellipse " << a << " " << b;
  c.description_ = os.str();
  c.finalize();
  return c;
}

BoundaryCurve BoundaryCurve::star(int k, double eps, double R) {
  if (k < 2) throw InvalidInput("star needs k >= 2");
  if (!(std::abs(eps) < 1.0)) throw InvalidInput("star needs |eps| < 1");
  BoundaryCurve c;
  const std::size_t n = static_cast<std::size_t>(k + 2);
  c.cx_.assign(n, 0.0);
  c.sx_.assign(n, 0.0);
  c.cy_.assign(n, 0.0);
  c.sy_.assign(n, 0.0);
  // x = R cos t (1 + eps cos kt), y = R sin t (1 + eps cos kt)
  c.cx_[1] += R;
  c.sy_[1] += R;
  c.cx_[k + 1] += 0.5 * R * eps;
  c.cx_[k - 1] += 0.5 * R * eps;
  c.sy_[k + 1] += 0.5 * R * eps;
  c.sy_[k - 1] -= 0.5 * R * eps;
  std::ostringstream os;
  os << "star " << k << " " << eps;
  c.description_ = os.str();
  c.finalize();
  return c;
}

BoundaryCurve BoundaryCurve::from_samples(const std::vector<Vec2>& pts) {
  const std::size_t M = pts.size();
  if (M < 8) throw InvalidInput("curve needs at least 8 samples");
  BoundaryCurve c;
  const std::size_t K = M / 2;
  c.cx_.assign(K + 1, 0.0);
  c.sx_.assign(K + 1, 0.0);
  c.cy_.assign(K + 1, 0.0);
  c.sy_.assign(K + 1, 0.0);
  for (std::size_t k = 0; k <= K; ++k) {
    double ax = 0, bx = 0, ay = 0, by = 0;
    for (std::size_t j = 0; j < M; ++j) {
      const double th = 2 * kPi * static_cast<double>(k * j % M) / M;
      ax += pts[j].x * std::cos(th);
      bx += pts[j].x * std::sin(th);
      ay += pts[j].y * std::cos(th);
      by += pts[j].y * std::sin(th);
    }
    const bool edge = (k == 0) || (M % 2 == 0 && k == K);
    const double s = edge ? 1.0 / M : 2.0 / M;
    c.cx_[k] = s * ax;
    c.cy_[k] = s * ay;
    c.sx_[k] = edge ? 0.0 : s * bx;
    c.sy_[k] = edge ? 0.0 : s * by;
  }
  c.description_ = "sampled";
  c.finalize();
  return c;
}

BoundaryCurve BoundaryCurve::from_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot read curve file " + path);
  std::string line;
  std::getline(is, line);
  if (line.find("theta") == std::string::npos)
    throw InvalidInput("curve CSV header must be theta,x,y");
  std::vector<Vec2> pts;
  std::vector<double> th;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double t, x, y;
    if (!(ls >> t >> x >> y)) throw InvalidInput("bad curve CSV row: " + line);
    th.push_back(t);
    pts.push_back({x, y});
  }
  const double M = static_cast<double>(pts.size());
  for (std::size_t j = 0; j < th.size(); ++j)
    if (std::abs(th[j] - 2 * kPi * j / M) > 1e-8)
      throw InvalidInput("curve CSV parameters must be uniform on [0, 2pi)");
  auto c = from_samples(pts);
  c.description_ = "csv " + path;
  return c;
}

BoundaryCurve BoundaryCurve::from_spec(const std::string& spec) {
  std::istringstream is(spec);
  std::string kind;
  is >> kind;
  if (kind == "circle") {
    double R = 1;
    is >> R;
    return circle(R);
  }
  if (kind == "ellipse") {
    double a = 1, b = 1;
    if (!(is >> a >> b)) throw InvalidInput("ellipse needs 'a b'");
    return ellipse(a, b);
  }
  if (kind == "star") {
    int k = 0;
    double eps = 0;
    if (!(is >> k >> eps)) throw InvalidInput("star needs 'k eps'");
    return star(k, eps);
  }
  return from_csv(spec);
}

Vec2 BoundaryCurve::gamma(double t) const {
  Vec2 p{cx_[0], cy_[0]};
  for (std::size_t k = 1; k < cx_.size(); ++k) {
    const double c = std::cos(k * t), s = std::sin(k * t);
    p.x += cx_[k] * c + sx_[k] * s;
    p.y += cy_[k] * c + sy_[k] * s;
  }
  return p;
}

Vec2 BoundaryCurve::d1(double t) const {
  Vec2 p;
  for (std::size_t k = 1; k < cx_.size(); ++k) {
    const double c = std::cos(k * t), s = std::sin(k * t);
    const double kk = static_cast<double>(k);
    p.x += kk * (-cx_[k] * s + sx_[k] * c);
    p.y += kk * (-cy_[k] * s + sy_[k] * c);
  }
  return p;
}

Vec2 BoundaryCurve::d2(double t) const {
  Vec2 p;
  for (std::size_t k = 1; k < cx_.size(); ++k) {
    const double c = std::cos(k * t), s = std::sin(k * t);
    const double k2 = static_cast<double>(k * k);
    p.x -= k2 * (cx_[k] * c + sx_[k] * s);
    p.y -= k2 * (cy_[k] * c + sy_[k] * s);
  }
  return p;
}

Vec2 BoundaryCurve::tangent(double t) const {
  const Vec2 d = d1(t);
  return (1.0 / norm(d)) * d;
}

Vec2 BoundaryCurve::normal(double t) const {
  const Vec2 tt = tangent(t);
  return {tt.y, -tt.x};  // outward for counterclockwise orientation
}

double BoundaryCurve::curvature(double t) const {
  const Vec2 a = d1(t), b = d2(t);
  const double s = norm(a);
  return cross(a, b) / (s * s * s);
}

CurveNodes BoundaryCurve::nodes(int M) const {
  if (M < 8) throw InvalidInput("need at least 8 boundary nodes");
  CurveNodes n;
  n.M = M;
  for (int j = 0; j < M; ++j) {
    const double t = 2 * kPi * j / M;
    const Vec2 d = d1(t);
    const double s = norm(d);
    n.theta.push_back(t);
    n.pos.push_back(gamma(t));
    n.tangent.push_back((1.0 / s) * d);
    n.normal.push_back({d.y / s, -d.x / s});
    n.speed.push_back(s);
    n.curvature.push_back(curvature(t));
    n.weight.push_back(2 * kPi / M * s);
    n.length += 2 * kPi / M * s;
  }
  return n;
}

void BoundaryCurve::finalize() {
  // enforce counterclockwise orientation
  double area = 0;
  const int M = 512;
  for (int j = 0; j < M; ++j) {
    const double t = 2 * kPi * j / M;
    area += cross(gamma(t), d1(t)) * 0.5 * 2 * kPi / M;
  }
  if (area < 0) {
    for (auto& v : sx_) v = -v;
    for (auto& v : sy_) v = -v;
  }
  fine_.clear();
  const int F = 4096;
  for (int j = 0; j < F; ++j) fine_.push_back(gamma(2 * kPi * j / F));
}

void BoundaryCurve::validate(int M) const {
  double smin = 1e300, kmax = 0;
  const int F = std::max(M * 4, 512);
  for (int j = 0; j < F; ++j) {
    const double t = 2 * kPi * j / F;
    smin = std::min(smin, speed(t));
    kmax = std::max(kmax, std::abs(curvature(t)));
  }
  if (!(smin > 1e-10)) throw GeometryError("curve speed vanishes");
  if (!std::isfinite(kmax)) throw GeometryError("curvature is unbounded");
  const auto n = nodes(M);
  for (int i = 0; i < M; ++i)
    for (int j = i + 2; j < M; ++j) {
      if (i == 0 && j == M - 1) continue;
      if (segments_cross(n.pos[i], n.pos[(i + 1) % M], n.pos[j],
                         n.pos[(j + 1) % M]))
        throw GeometryError("curve self-intersects at node resolution");
    }
  // outward normals: a point slightly outside along n must be outside
  for (int i = 0; i < M; i += std::max(1, M / 16)) {
    const double eps = 1e-3 * n.h();
    if (inside(n.pos[i] + eps * n.normal[i]) ||
        !inside(n.pos[i] - eps * n.normal[i]))
      throw GeometryError("normals are not outward");
  }
}

bool BoundaryCurve::inside(Vec2 x) const {
  // winding number of the fine polygon
  int wn = 0;
  const std::size_t F = fine_.size();
  for (std::size_t j = 0; j < F; ++j) {
    const Vec2 a = fine_[j], b = fine_[(j + 1) % F];
    if (a.y <= x.y) {
      if (b.y > x.y && cross(b - a, x - a) > 0) ++wn;
    } else {
      if (b.y <= x.y && cross(b - a, x - a) < 0) --wn;
    }
  }
  return wn != 0;
}

double BoundaryCurve::nearest_theta(Vec2 x) const {
  const std::size_t F = fine_.size();
  std::size_t best = 0;
  double bd = 1e300;
  for (std::size_t j = 0; j < F; ++j) {
    const double d = norm2(fine_[j] - x);
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  double t = 2 * kPi * static_cast<double>(best) / static_cast<double>(F);
  for (int it = 0; it < 20; ++it) {
    const Vec2 g = gamma(t) - x, a = d1(t), b = d2(t);
    const double f = dot(g, a), fp = dot(a, a) + dot(g, b);
    if (!(fp > 0)) break;
    const double step = f / fp;
    t -= step;
    if (std::abs(step) < 1e-14) break;
  }
  t = std::fmod(t, 2 * kPi);
  if (t < 0) t += 2 * kPi;
  return t;
}

double BoundaryCurve::distance(Vec2 x) const {
  return norm(gamma(nearest_theta(x)) - x);
}

double BoundaryCurve::diameter() const {
  double d = 0;
  const std::size_t F = fine_.size(), step = 8;
  for (std::size_t i = 0; i < F; i += step)
    for (std::size_t j = i + step; j < F; j += step)
      d = std::max(d, norm(fine_[i] - fine_[j]));
  return d;
}

std::pair<Vec2, Vec2> BoundaryCurve::bounding_box() const {
  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const auto& p : fine_) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  return {lo, hi};
}

}  // namespace dstokes

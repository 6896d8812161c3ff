#include "dstokes/helmholtz.hpp"

#include <Eigen/Dense>

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>

#include "dstokes/heat_kernel.hpp"

namespace dstokes {

void BoxSpec::validate() const {
  if (!(size > 0) || !std::isfinite(size)) throw InvalidInput("box size must be positive");
  if (n < 4 || (n & (n - 1)) != 0) throw InvalidInput("box n must be a power of two >= 4");
}

PeriodicGridField::PeriodicGridField(BoxSpec box, std::vector<double> times,
                                     int components)
    : box_(box), times_(std::move(times)), components_(components) {
  box_.validate();
  if (components < 1) throw InvalidInput("need at least one component");
  if (times_.empty()) throw InvalidInput("need at least one time");
  values_.assign(n_cells() * times_.size() * components_, 0.0);
  means_.assign(times_.size() * components_, 0.0);
}

Vec2 PeriodicGridField::node(int ix, int iy) const {
  return box_.lo() + Vec2{ix * box_.h(), iy * box_.h()};
}

void PeriodicGridField::update_means() {
  const std::size_t T = times_.size();
  for (std::size_t t = 0; t < T; ++t)
    for (int c = 0; c < components_; ++c) {
      double s = 0;
      for (std::size_t k = 0; k < n_cells(); ++k)
        s += values_[(k * T + t) * components_ + c];
      means_[t * components_ + c] = s / static_cast<double>(n_cells());
    }
}

std::vector<double> PeriodicGridField::slice(std::size_t t, int c) const {
  std::vector<double> v(n_cells());
  const std::size_t T = times_.size();
  for (std::size_t k = 0; k < n_cells(); ++k) v[k] = values_[(k * T + t) * components_ + c];
  return v;
}

void PeriodicGridField::set_slice(std::size_t t, int c, const std::vector<double>& v) {
  const std::size_t T = times_.size();
  for (std::size_t k = 0; k < n_cells(); ++k) values_[(k * T + t) * components_ + c] = v[k];
}

SampledField PeriodicGridField::to_sampled() const {
  std::vector<Vec2> pts;
  pts.reserve(n_cells());
  for (int iy = 0; iy < box_.n; ++iy)
    for (int ix = 0; ix < box_.n; ++ix) pts.push_back(node(ix, iy));
  SampledField f(pts, times_, components_);
  f.values() = values_;
  return f;
}

PeriodicGridField PeriodicGridField::from_function(
    BoxSpec box, std::vector<double> times, int components,
    const std::function<void(Vec2, double, double*)>& f) {
  PeriodicGridField g(box, std::move(times), components);
  const std::size_t T = g.times_.size();
  for (int iy = 0; iy < box.n; ++iy)
    for (int ix = 0; ix < box.n; ++ix)
      for (std::size_t t = 0; t < T; ++t) f(g.node(ix, iy), g.times_[t], &g.at(ix, iy, t));
  g.update_means();
  return g;
}

// ---- extension ----------------------------------------------------------------

double extension_cutoff(double u) {
  if (u <= 0) return 1.0;
  if (u >= 1) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - u)), b = std::exp(-1.0 / u);
  return a / (a + b);
}

namespace {

// rho phi(d / rho): identity for d <= rho / 2, smooth, saturating at
// depth_max = 0.75 rho; phi' (x) = cutoff(2x - 1).
double saturated_depth(double d, double depth_max) {
  const double rho = depth_max / 0.75;
  const double x = d / rho;
  if (x <= 0.5) return d;
  if (x >= 1.0) return depth_max;
  static const QuadRule rule = gauss_legendre(16, 0.0, 1.0);
  double s = 0;
  for (std::size_t k = 0; k < rule.x.size(); ++k) {
    const double y = 0.5 + (x - 0.5) * rule.x[k];
    s += rule.w[k] * extension_cutoff(2 * y - 1);
  }
  return rho * (0.5 + (x - 0.5) * s);
}

}  // namespace

std::vector<double> reflection_coefficients(int order) {
  // sum_j a_j (-b_j)^m = 1 for m = 0..order, b_j = j / (order + 1)
  const int K = order + 1;
  Eigen::MatrixXd V(K, K);
  for (int m = 0; m < K; ++m)
    for (int j = 0; j < K; ++j) V(m, j) = std::pow(-static_cast<double>(j + 1) / K, m);
  const Eigen::VectorXd a = V.fullPivLu().solve(Eigen::VectorXd::Ones(K));
  return {a.data(), a.data() + K};
}

PeriodicGridField extend_to_box(
    const std::function<void(Vec2, double, double*)>& f, int components,
    const std::vector<double>& times, const BoundaryCurve& curve,
    const BoxSpec& box, const ExtensionOptions& opt) {
  box.validate();
  const double w = opt.width > 0 ? opt.width : 0.1 * curve.diameter();
  const auto [blo, bhi] = curve.bounding_box();
  const Vec2 lo = box.lo();
  const double margin = w + box.h();
  if (blo.x - margin <= lo.x || blo.y - margin <= lo.y ||
      bhi.x + margin >= lo.x + box.size - box.h() ||
      bhi.y + margin >= lo.y + box.size - box.h())
    throw GeometryError("domain plus extension width does not fit inside the box");

  PeriodicGridField g(box, times, components);
  const std::size_t T = times.size();
  std::vector<double> buf(static_cast<std::size_t>(components)), rbuf(buf);
  const int K = std::max(1, opt.reflect_order) + 1;
  std::vector<double> coef = reflection_coefficients(K - 1);
  std::vector<double> anchor(T * components, 0.0);
  if (opt.anchor_mean) {
    const auto bn = curve.nodes(256);
    for (std::size_t t = 0; t < T; ++t)
      for (int j = 0; j < bn.M; ++j) {
        f(bn.pos[j], times[t], buf.data());
        for (int c = 0; c < components; ++c)
          anchor[t * components + c] += buf[c] * bn.weight[j] / bn.length;
      }
  }
  for (int iy = 0; iy < box.n; ++iy)
    for (int ix = 0; ix < box.n; ++ix) {
      const Vec2 x = g.node(ix, iy);
      Vec2 src = x;
      double chi = 1.0;
      bool reflected = false;
      std::vector<Vec2> src_pts;
      if (x.x < blo.x - w || x.x > bhi.x + w || x.y < blo.y - w || x.y > bhi.y + w) {
        chi = 0.0;
      } else if (!curve.inside(x)) {
        src = curve.gamma(curve.nearest_theta(x));
        chi = extension_cutoff(norm(x - src) / w);
        if (opt.reflect && chi > 0) {
          Vec2 d = x - src;
          const double dn = norm(d);
          if (opt.reflect_depth > 0 && dn > 0) d = (saturated_depth(dn, opt.reflect_depth) / dn) * d;
          reflected = true;
          for (int j = 1; j <= K; ++j) {
            src_pts.push_back(src - (static_cast<double>(j) / K) * d);
            reflected = reflected && curve.inside(src_pts.back());
          }
        }
      }
      for (std::size_t t = 0; t < T; ++t) {
        if (reflected) {
          std::fill(rbuf.begin(), rbuf.end(), 0.0);
          for (int j = 0; j < K; ++j) {
            f(src_pts[j], times[t], buf.data());
            for (int c = 0; c < components; ++c) rbuf[c] += coef[j] * buf[c];
          }
          buf = rbuf;
        } else if (chi > 0) {
          f(src, times[t], buf.data());
        }
        for (int c = 0; c < components; ++c) {
          const double m = anchor[t * components + c];
          g.at(ix, iy, t, c) = chi > 0 ? m + chi * (buf[c] - m) : m;
        }
      }
    }
  g.update_means();
  return g;
}

PeriodicGridField extend_to_box(const SampledField& f,
                                const BoundaryCurve& curve, const BoxSpec& box,
                                const ExtensionOptions& opt) {
  const GridInterpolant I(f);
  const int C = f.components();
  const auto& ts = f.times();
  return extend_to_box(
      [&](Vec2 x, double t, double* out) {
        for (int c = 0; c < C; ++c) out[c] = I(x, t, c);
      },
      C, ts, curve, box, opt);
}

// ---- FFT plumbing ---------------------------------------------------------------

std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

namespace {

// FFTW plans shared by all workers through the new-array execute interface.
class Plans {
 public:
  explicit Plans(int n) : n_(n) {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    auto* a = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    auto* b = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    fwd_ = fftw_plan_dft_2d(n, n, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(n, n, a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(a);
    fftw_free(b);
  }
  ~Plans() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;

  void forward(fftw_complex* in, fftw_complex* out) const { fftw_execute_dft(fwd_, in, out); }
  void backward(fftw_complex* in, fftw_complex* out) const { fftw_execute_dft(bwd_, in, out); }

 private:
  int n_;
  fftw_plan fwd_, bwd_;
};

struct Buffer {
  explicit Buffer(std::size_t n) : a(fftw_alloc_complex(n)), b(fftw_alloc_complex(n)) {}
  ~Buffer() {
    fftw_free(a);
    fftw_free(b);
  }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  fftw_complex* a;
  fftw_complex* b;
};

// signed wavenumber of index k, and whether it is the Nyquist index
inline int signed_mode(int k, int n) { return k <= n / 2 - 1 ? k : k - n; }
inline bool nyquist(int k, int n) { return k == n / 2; }

template <class F>
void for_slices(std::size_t count, int workers, std::size_t n2, F&& body) {
  parallel_for(count, workers, [&](std::size_t i) {
    thread_local std::size_t cap = 0;
    thread_local std::unique_ptr<Buffer> buf;
    if (cap != n2) {
      buf = std::make_unique<Buffer>(n2);
      cap = n2;
    }
    body(i, *buf);
  });
}

}  // namespace

PeriodicSpectrum::PeriodicSpectrum(BoxSpec box, std::vector<double> times, int components)
    : box_(box), times_(std::move(times)), components_(components) {
  coef_.assign(times_.size() * components_ * n2(), {0.0, 0.0});
}

PeriodicSpectrum to_spectrum(const PeriodicGridField& f, int workers) {
  const int n = f.n();
  const std::size_t n2 = f.n_cells();
  PeriodicSpectrum s(f.box(), f.times(), f.components());
  const Plans plans(n);
  const std::size_t T = f.times().size();
  const int C = f.components();
  for_slices(T * C, workers, n2, [&](std::size_t i, Buffer& b) {
    const std::size_t t = i / C;
    const int c = static_cast<int>(i % C);
    for (std::size_t k = 0; k < n2; ++k) {
      b.a[k][0] = f.values()[(k * T + t) * C + c];
      b.a[k][1] = 0.0;
    }
    plans.forward(b.a, b.b);
    std::complex<double>* out = s.block(t, c);
    const double scale = 1.0 / static_cast<double>(n2);
    for (std::size_t k = 0; k < n2; ++k) out[k] = {b.b[k][0] * scale, b.b[k][1] * scale};
  });
  return s;
}

PeriodicGridField PeriodicSpectrum::to_grid(int workers) const {
  const int n = box_.n;
  const std::size_t N2 = n2();
  PeriodicGridField g(box_, times_, components_);
  const Plans plans(n);
  const std::size_t T = times_.size();
  const int C = components_;
  for_slices(T * C, workers, N2, [&](std::size_t i, Buffer& b) {
    const std::size_t t = i / C;
    const int c = static_cast<int>(i % C);
    const std::complex<double>* in = block(t, c);
    for (std::size_t k = 0; k < N2; ++k) {
      b.a[k][0] = in[k].real();
      b.a[k][1] = in[k].imag();
    }
    plans.backward(b.a, b.b);
    for (std::size_t k = 0; k < N2; ++k) g.values()[(k * T + t) * C + c] = b.b[k][0];
  });
  g.update_means();
  return g;
}

namespace {

// phases exp(i k u) for signed modes, Nyquist set to zero
void phases(int n, double u, std::vector<std::complex<double>>& e) {
  e.assign(static_cast<std::size_t>(n), {0.0, 0.0});
  for (int k = 0; k < n; ++k) {
    if (nyquist(k, n)) continue;
    e[k] = std::polar(1.0, signed_mode(k, n) * u);
  }
}

}  // namespace

SampledField PeriodicSpectrum::evaluate(const std::vector<Vec2>& targets, int workers) const {
  const int n = box_.n;
  const std::size_t T = times_.size();
  const int C = components_;
  SampledField out(targets, times_, C);
  const Vec2 lo = box_.lo();
  const double k0 = 2 * kPi / box_.size;
  parallel_for(targets.size(), workers, [&](std::size_t p) {
    std::vector<std::complex<double>> ex, ey;
    phases(n, k0 * (targets[p].x - lo.x), ex);
    phases(n, k0 * (targets[p].y - lo.y), ey);
    for (std::size_t t = 0; t < T; ++t)
      for (int c = 0; c < C; ++c) {
        const std::complex<double>* cf = block(t, c);
        double acc = 0;
        for (int ky = 0; ky < n; ++ky) {
          if (nyquist(ky, n)) continue;
          std::complex<double> row = 0;
          const std::complex<double>* r = cf + static_cast<std::size_t>(ky) * n;
          for (int kx = 0; kx < n; ++kx) row += r[kx] * ex[kx];
          acc += (row * ey[ky]).real();
        }
        out.at(p, t, c) = acc;
      }
  });
  return out;
}

SampledField PeriodicSpectrum::evaluate_gradient(const std::vector<Vec2>& targets, int c,
                                                 int workers) const {
  const int n = box_.n;
  const std::size_t T = times_.size();
  SampledField out(targets, times_, 2);
  const Vec2 lo = box_.lo();
  const double k0 = 2 * kPi / box_.size;
  const std::complex<double> I(0, 1);
  parallel_for(targets.size(), workers, [&](std::size_t p) {
    std::vector<std::complex<double>> ex, ey;
    phases(n, k0 * (targets[p].x - lo.x), ex);
    phases(n, k0 * (targets[p].y - lo.y), ey);
    for (std::size_t t = 0; t < T; ++t) {
      const std::complex<double>* cf = block(t, c);
      double gx = 0, gy = 0;
      for (int ky = 0; ky < n; ++ky) {
        if (nyquist(ky, n)) continue;
        std::complex<double> row = 0, rowx = 0;
        const std::complex<double>* r = cf + static_cast<std::size_t>(ky) * n;
        for (int kx = 0; kx < n; ++kx) {
          const std::complex<double> v = r[kx] * ex[kx];
          row += v;
          rowx += (k0 * signed_mode(kx, n)) * v;
        }
        gx += (I * rowx * ey[ky]).real();
        gy += (I * (k0 * signed_mode(ky, n)) * row * ey[ky]).real();
      }
      out.at(p, t, 0) = gx;
      out.at(p, t, 1) = gy;
    }
  });
  return out;
}

// ---- multipliers ----------------------------------------------------------------

PeriodicGridField leray_project(const PeriodicGridField& f, int workers) {
  if (f.components() != 2) throw InvalidInput("Leray projection needs a vector field");
  PeriodicSpectrum s = to_spectrum(f, workers);
  const int n = f.n();
  for (std::size_t t = 0; t < f.times().size(); ++t) {
    std::complex<double>* a = s.block(t, 0);
    std::complex<double>* b = s.block(t, 1);
    for (int ky = 0; ky < n; ++ky)
      for (int kx = 0; kx < n; ++kx) {
        if (kx == 0 && ky == 0) continue;
        const std::size_t k = static_cast<std::size_t>(ky) * n + kx;
        if (nyquist(kx, n) || nyquist(ky, n)) {
          // the multiplier is not Hermitian there
          a[k] = b[k] = 0;
          continue;
        }
        const double xx = signed_mode(kx, n), yy = signed_mode(ky, n);
        const double r2 = xx * xx + yy * yy;
        const std::complex<double> u = a[k], v = b[k];
        a[k] = u - xx * (xx * u + yy * v) / r2;
        b[k] = v - yy * (xx * u + yy * v) / r2;
      }
  }
  return s.to_grid(workers);
}

PeriodicGridField riesz(int axis, const PeriodicGridField& f, int workers) {
  if (axis != 0 && axis != 1) throw InvalidInput("Riesz axis must be 0 or 1");
  PeriodicSpectrum s = to_spectrum(f, workers);
  const int n = f.n();
  const std::complex<double> mI(0, -1);
  for (std::size_t t = 0; t < f.times().size(); ++t)
    for (int c = 0; c < f.components(); ++c) {
      std::complex<double>* a = s.block(t, c);
      for (int ky = 0; ky < n; ++ky)
        for (int kx = 0; kx < n; ++kx) {
          const std::size_t k = static_cast<std::size_t>(ky) * n + kx;
          const int ka = axis == 0 ? kx : ky;
          if ((kx == 0 && ky == 0) || nyquist(ka, n)) {
            a[k] = 0;
            continue;
          }
          const double xx = signed_mode(kx, n), yy = signed_mode(ky, n);
          a[k] *= mI * (axis == 0 ? xx : yy) / std::sqrt(xx * xx + yy * yy);
        }
    }
  return s.to_grid(workers);
}

// ---- heat potentials --------------------------------------------------------------

namespace {

// int_0^D e^{-lam (D - s)} (1 - s/D) ds and with s/D, as (a_old, a_new)
void linear_weights(double lam, double D, double& a_old, double& a_new) {
  const double x = lam * D;
  if (x < 1e-4) {
    a_old = D * (0.5 - x / 3 + x * x / 8);
    a_new = D * (0.5 - x / 6 + x * x / 24);
    return;
  }
  const double phi1 = -std::expm1(-x) / x;
  a_old = D * (1 - std::exp(-x) * (1 + x)) / (x * x);
  a_new = D * phi1 - a_old;
}

}  // namespace

PeriodicSpectrum periodic_heat_potential(const PeriodicSpectrum& src) {
  const int n = src.box().n;
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  const auto& ts = src.times();
  PeriodicSpectrum w(src.box(), ts, src.components());
  const double k0 = 2 * kPi / src.box().size;
  for (int c = 0; c < src.components(); ++c)
    for (std::size_t k = 0; k < n2; ++k) {
      const double xx = k0 * signed_mode(static_cast<int>(k % n), n);
      const double yy = k0 * signed_mode(static_cast<int>(k / n), n);
      const double lam = xx * xx + yy * yy;
      std::complex<double> v = 0;
      for (std::size_t t = 1; t < ts.size(); ++t) {
        const double D = ts[t] - ts[t - 1];
        double a0, a1;
        linear_weights(lam, D, a0, a1);
        v = std::exp(-lam * D) * v + a0 * src.block(t - 1, c)[k] + a1 * src.block(t, c)[k];
        w.block(t, c)[k] = v;
      }
    }
  return w;
}

PeriodicSpectrum periodic_heat_semigroup(const PeriodicGridField& u0,
                                         const std::vector<double>& times, int workers) {
  PeriodicGridField first(u0.box(), {0.0}, u0.components());
  for (int c = 0; c < u0.components(); ++c) first.set_slice(0, c, u0.slice(0, c));
  const PeriodicSpectrum s0 = to_spectrum(first, workers);
  const int n = u0.n();
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  const double k0 = 2 * kPi / u0.box().size;
  PeriodicSpectrum out(u0.box(), times, u0.components());
  for (std::size_t t = 0; t < times.size(); ++t)
    for (int c = 0; c < u0.components(); ++c)
      for (std::size_t k = 0; k < n2; ++k) {
        const double xx = k0 * signed_mode(static_cast<int>(k % n), n);
        const double yy = k0 * signed_mode(static_cast<int>(k / n), n);
        out.block(t, c)[k] = std::exp(-(xx * xx + yy * yy) * times[t]) * s0.block(0, c)[k];
      }
  return out;
}

PeriodicSpectrum build_V1_spectrum(const PeriodicGridField& f_ext, int workers) {
  if (f_ext.components() != 2) throw InvalidInput("V1 needs a vector source");
  return periodic_heat_potential(to_spectrum(leray_project(f_ext, workers), workers));
}

SampledField build_V1(const PeriodicGridField& f_ext, const std::vector<Vec2>& targets,
                      int workers) {
  return build_V1_spectrum(f_ext, workers).evaluate(targets, workers);
}

PeriodicSpectrum build_V2_spectrum(const PeriodicGridField& F_ext, int workers) {
  if (F_ext.components() != 4) throw InvalidInput("V2 needs a 2x2 tensor source");
  const PeriodicSpectrum s = to_spectrum(F_ext, workers);
  const int n = F_ext.n();
  const double k0 = 2 * kPi / F_ext.box().size;
  PeriodicSpectrum d(F_ext.box(), F_ext.times(), 2);
  const std::complex<double> I(0, 1);
  for (std::size_t t = 0; t < F_ext.times().size(); ++t)
    for (int ky = 0; ky < n; ++ky)
      for (int kx = 0; kx < n; ++kx) {
        const std::size_t k = static_cast<std::size_t>(ky) * n + kx;
        if ((kx == 0 && ky == 0) || nyquist(kx, n) || nyquist(ky, n)) continue;
        const double xx = k0 * signed_mode(kx, n), yy = k0 * signed_mode(ky, n);
        // row divergence
        const std::complex<double> u = I * (xx * s.block(t, 0)[k] + yy * s.block(t, 1)[k]);
        const std::complex<double> v = I * (xx * s.block(t, 2)[k] + yy * s.block(t, 3)[k]);
        const double r2 = xx * xx + yy * yy;
        d.block(t, 0)[k] = u - xx * (xx * u + yy * v) / r2;
        d.block(t, 1)[k] = v - yy * (xx * u + yy * v) / r2;
      }
  return periodic_heat_potential(d);
}

SampledField build_V2(const PeriodicGridField& F_ext, const std::vector<Vec2>& targets,
                      int workers) {
  return build_V2_spectrum(F_ext, workers).evaluate(targets, workers);
}

}  // namespace dstokes

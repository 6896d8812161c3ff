#include "dstokes/common.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace dstokes {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i)
    v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v[n - 1] = b;
  return v;
}

std::vector<double> geomspace(double a, double b, std::size_t n) {
  if (a <= 0 || b <= 0) throw InvalidInput("geomspace needs positive ends");
  auto l = linspace(std::log(a), std::log(b), n);
  for (auto& v : l) v = std::exp(v);
  if (n > 0) {
    l.front() = a;
    l.back() = b;
  }
  return l;
}

QuadRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw InvalidInput("gauss_legendre needs n >= 1");
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    // recompute derivative at converged root
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = n * (z * p1 - p2) / (z * z - 1.0);
    double w = 2.0 / ((1.0 - z * z) * pp * pp);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  const double h = 0.5 * (b - a), c = 0.5 * (b + a);
  for (int i = 0; i < n; ++i) {
    r.x[i] = c + h * r.x[i];
    r.w[i] *= h;
  }
  return r;
}

QuadRule composite_gauss(int panels, int order, double a, double b) {
  QuadRule base = gauss_legendre(order);
  QuadRule r;
  r.x.reserve(static_cast<std::size_t>(panels * order));
  r.w.reserve(static_cast<std::size_t>(panels * order));
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) {
      r.x.push_back(lo + 0.5 * h * (base.x[i] + 1.0));
      r.w.push_back(0.5 * h * base.w[i]);
    }
  }
  return r;
}

QuadRule graded_gauss(int levels, int order, double a, double b,
                      double ratio) {
  QuadRule base = gauss_legendre(order);
  QuadRule r;
  // breakpoints a, a+L*ratio^{levels-1}, ..., a+L*ratio, b
  std::vector<double> bp;
  bp.push_back(a);
  for (int k = levels - 1; k >= 1; --k)
    bp.push_back(a + (b - a) * std::pow(ratio, k));
  bp.push_back(b);
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    const double lo = bp[p], hi = bp[p + 1];
    for (int i = 0; i < order; ++i) {
      r.x.push_back(lo + 0.5 * (hi - lo) * (base.x[i] + 1.0));
      r.w.push_back(0.5 * (hi - lo) * base.w[i]);
    }
  }
  return r;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidInput("fit_line needs >= 2 matching samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

namespace {
std::atomic<int> g_workers{1};
}

int default_workers() { return g_workers.load(); }
void set_default_workers(int w) { g_workers.store(std::max(1, w)); }

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body) {
  if (workers <= 0) workers = default_workers();
  const std::size_t nw =
      std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (nw <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += nw) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace dstokes

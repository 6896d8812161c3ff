#include "dstokes/heat_kernel.hpp"

#include <algorithm>
#include <map>

namespace dstokes {

void QuadratureConfig::validate() const {
  if (gaussian_cutoff_sigmas < 6.0)
    throw InvalidInput("gaussian_cutoff_sigmas must be >= 6");
  if (!(tolerance > 0)) throw InvalidInput("tolerance must be positive");
  if (!(space_resolution > 0))
    throw InvalidInput("space_resolution must be positive");
  if (time_rule < 2) throw InvalidInput("time_rule must be >= 2");
  if (time_levels < 1) throw InvalidInput("time_levels must be >= 1");
}

double eval_gamma(KernelPoint p) {
  if (!(p.t > 0)) throw DomainError("Gamma needs t > 0");
  return std::exp(-norm2(p.x) / (4.0 * p.t)) / (4.0 * kPi * p.t);
}

Vec2 eval_grad_gamma(KernelPoint p) {
  const double g = eval_gamma(p);
  return (-g / (2.0 * p.t)) * p.x;
}

double eval_dt_gamma(KernelPoint p) {
  const double g = eval_gamma(p);
  return g * (norm2(p.x) / (4.0 * p.t * p.t) - 1.0 / p.t);
}

double eval_newtonian(Vec2 x) {
  const double r2 = norm2(x);
  if (r2 == 0.0) throw DomainError("N is singular at the origin");
  return std::log(r2) / (4.0 * kPi);
}

Vec2 eval_grad_newtonian(Vec2 x) {
  const double r2 = norm2(x);
  if (r2 == 0.0) throw DomainError("grad N is singular at the origin");
  return (1.0 / (2.0 * kPi * r2)) * x;
}

// ---- grid interpolant ----------------------------------------------------------

GridInterpolant::GridInterpolant(const SampledField& f) : field_(f) {
  f.validate();
  for (const auto& p : f.points()) {
    xs_.push_back(p.x);
    ys_.push_back(p.y);
  }
  std::sort(xs_.begin(), xs_.end());
  xs_.erase(std::unique(xs_.begin(), xs_.end()), xs_.end());
  std::sort(ys_.begin(), ys_.end());
  ys_.erase(std::unique(ys_.begin(), ys_.end()), ys_.end());
  if (xs_.size() < 2 || ys_.size() < 2 ||
      xs_.size() * ys_.size() != f.n_points())
    throw InvalidInput("field is not sampled on a full tensor grid");
  index_.assign(xs_.size() * ys_.size(), 0);
  for (std::size_t p = 0; p < f.n_points(); ++p) {
    const auto ix = static_cast<std::size_t>(
        std::lower_bound(xs_.begin(), xs_.end(), f.points()[p].x) -
        xs_.begin());
    const auto iy = static_cast<std::size_t>(
        std::lower_bound(ys_.begin(), ys_.end(), f.points()[p].y) -
        ys_.begin());
    index_[ix * ys_.size() + iy] = p;
  }
}

double GridInterpolant::value(std::size_t ix, std::size_t iy, double s,
                              int c) const {
  const std::size_t p = index_[ix * ys_.size() + iy];
  const auto& ts = field_.times();
  if (ts.size() == 1 || s <= ts.front()) return field_.at(p, 0, c);
  if (s >= ts.back()) return field_.at(p, ts.size() - 1, c);
  const auto k = static_cast<std::size_t>(
      std::upper_bound(ts.begin(), ts.end(), s) - ts.begin());
  const double w = (s - ts[k - 1]) / (ts[k] - ts[k - 1]);
  return (1 - w) * field_.at(p, k - 1, c) + w * field_.at(p, k, c);
}

double GridInterpolant::operator()(Vec2 y, double s, int c) const {
  if (y.x < xs_.front() || y.x > xs_.back() || y.y < ys_.front() ||
      y.y > ys_.back())
    return 0.0;
  auto locate = [](const std::vector<double>& g, double v) {
    auto k = static_cast<std::size_t>(
        std::upper_bound(g.begin(), g.end(), v) - g.begin());
    k = std::clamp<std::size_t>(k, 1, g.size() - 1);
    return k - 1;
  };
  const std::size_t ix = locate(xs_, y.x), iy = locate(ys_, y.y);
  const double wx = (y.x - xs_[ix]) / (xs_[ix + 1] - xs_[ix]);
  const double wy = (y.y - ys_[iy]) / (ys_[iy + 1] - ys_[iy]);
  return (1 - wx) * (1 - wy) * value(ix, iy, s, c) +
         wx * (1 - wy) * value(ix + 1, iy, s, c) +
         (1 - wx) * wy * value(ix, iy + 1, s, c) +
         wx * wy * value(ix + 1, iy + 1, s, c);
}

// ---- Gaussian smoothing ------------------------------------------------------------

namespace {

// Tensor rule for int exp(-|w|^2) g(w) dw on the cutoff square; panel count
// chosen from the physical window width 4 sqrt(t) L.
const QuadRule& window_rule(const QuadratureConfig& cfg, double t) {
  const double L = cfg.gaussian_cutoff_sigmas / std::sqrt(2.0);
  const double width = 4.0 * std::sqrt(t) * L;
  int panels = static_cast<int>(
      std::ceil(cfg.space_resolution * width / cfg.time_rule));
  panels = std::clamp(panels, 8, 48);
  thread_local std::map<std::tuple<int, int, double>, QuadRule> cache;
  const auto key = std::make_tuple(panels, cfg.time_rule, L);
  auto it = cache.find(key);
  if (it == cache.end()) {
    QuadRule r = composite_gauss(panels, cfg.time_rule, -L, L);
    for (std::size_t i = 0; i < r.x.size(); ++i)
      r.w[i] *= std::exp(-r.x[i] * r.x[i]) / std::sqrt(kPi);
    it = cache.emplace(key, std::move(r)).first;
  }
  return it->second;
}

// pi^{-1} int exp(-|w|^2) g(x + 2 sqrt(t) w) dw
double smooth(const std::function<double(Vec2)>& g, Vec2 x, double t,
              const QuadratureConfig& cfg) {
  const QuadRule& r = window_rule(cfg, t);
  const double a = 2.0 * std::sqrt(t);
  double acc = 0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    double row = 0;
    for (std::size_t j = 0; j < r.x.size(); ++j)
      row += r.w[j] * g({x.x + a * r.x[i], x.y + a * r.x[j]});
    acc += r.w[i] * row;
  }
  return acc;
}

// pi^{-1} int w exp(-|w|^2) g(x + 2 sqrt(t) w) dw
Vec2 smooth_first_moment(const std::function<double(Vec2)>& g, Vec2 x,
                         double t, const QuadratureConfig& cfg) {
  const QuadRule& r = window_rule(cfg, t);
  const double a = 2.0 * std::sqrt(t);
  Vec2 acc;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    double row0 = 0, row1 = 0;
    for (std::size_t j = 0; j < r.x.size(); ++j) {
      const double v = r.w[j] * g({x.x + a * r.x[i], x.y + a * r.x[j]});
      row0 += v;
      row1 += v * r.x[j];
    }
    acc.x += r.w[i] * r.x[i] * row0;
    acc.y += r.w[i] * row1;
  }
  return acc;
}

// Rule in sigma = sqrt(tau) on [0, sqrt(t)], graded towards sigma = 0.
QuadRule sigma_rule(double t, const QuadratureConfig& cfg) {
  return graded_gauss(cfg.time_levels, cfg.time_rule, 0.0, std::sqrt(t), 0.5);
}

}  // namespace

double initial_potential_W(const SpaceFn& u0, Vec2 x, double t,
                           const QuadratureConfig& cfg) {
  if (t < 0) throw DomainError("W needs t >= 0");
  if (t == 0) return u0(x);
  return smooth(u0, x, t, cfg);
}

std::vector<double> initial_potential_W(const SampledField& u0, Vec2 x,
                                        double t,
                                        const QuadratureConfig& cfg) {
  GridInterpolant gi(u0);
  std::vector<double> out(static_cast<std::size_t>(gi.components()));
  for (int c = 0; c < gi.components(); ++c)
    out[c] = initial_potential_W([&](Vec2 y) { return gi(y, 0.0, c); }, x, t,
                                 cfg);
  return out;
}

Vec2 grad_initial_potential_W(const SpaceFn& u0, Vec2 x, double t,
                              const QuadratureConfig& cfg) {
  if (!(t > 0)) throw DomainError("grad W needs t > 0");
  // grad_x Gamma(x-z,t) dz = (w / sqrt t) pi^{-1} exp(-w^2) dw, z = x+2 sqrt(t) w
  return (1.0 / std::sqrt(t)) * smooth_first_moment(u0, x, t, cfg);
}

double volume_potential_L0(const SpaceTimeFn& f, Vec2 x, double t,
                           const QuadratureConfig& cfg) {
  if (t < 0) throw DomainError("Lambda_0 needs t >= 0");
  if (t == 0) return 0.0;
  const QuadRule sr = sigma_rule(t, cfg);
  double acc = 0;
  for (std::size_t k = 0; k < sr.x.size(); ++k) {
    const double sig = sr.x[k], tau = sig * sig, s = t - tau;
    acc += sr.w[k] * 2.0 * sig *
           smooth([&](Vec2 y) { return f(y, s); }, x, tau, cfg);
  }
  return acc;
}

std::vector<double> volume_potential_L0(const SampledField& f, Vec2 x,
                                        double t,
                                        const QuadratureConfig& cfg) {
  GridInterpolant gi(f);
  std::vector<double> out(static_cast<std::size_t>(gi.components()));
  for (int c = 0; c < gi.components(); ++c)
    out[c] = volume_potential_L0(
        [&](Vec2 y, double s) { return gi(y, s, c); }, x, t, cfg);
  return out;
}

Vec2 grad_volume_potential(const SpaceTimeFn& f, Vec2 x, double t,
                           const QuadratureConfig& cfg) {
  if (t < 0) throw DomainError("grad Lambda_0 needs t >= 0");
  if (t == 0) return {};
  // tau = sigma^2 cancels the tau^{-1/2} of the gradient kernel
  const QuadRule sr = sigma_rule(t, cfg);
  Vec2 acc;
  for (std::size_t k = 0; k < sr.x.size(); ++k) {
    const double sig = sr.x[k], tau = sig * sig, s = t - tau;
    acc += (2.0 * sr.w[k]) *
           smooth_first_moment([&](Vec2 y) { return f(y, s); }, x, tau, cfg);
  }
  return acc;
}

double div_form_potential(const SpaceTimeFn& F1, const SpaceTimeFn& F2,
                          Vec2 x, double t, const QuadratureConfig& cfg) {
  return grad_volume_potential(F1, x, t, cfg).x +
         grad_volume_potential(F2, x, t, cfg).y;
}

Vec2 div_form_potential(const SampledField& F, Vec2 x, double t,
                        const QuadratureConfig& cfg) {
  if (F.components() != 4)
    throw InvalidInput("tensor field needs 4 components (F11,F12,F21,F22)");
  GridInterpolant gi(F);
  auto comp = [&](int c) {
    return SpaceTimeFn([&gi, c](Vec2 y, double s) { return gi(y, s, c); });
  };
  return {div_form_potential(comp(0), comp(1), x, t, cfg),
          div_form_potential(comp(2), comp(3), x, t, cfg)};
}

}  // namespace dstokes

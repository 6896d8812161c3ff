#include "dstokes/faddeeva.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace dstokes {

namespace {

constexpr int kTerms = 36;

struct Coefficients {
  double L = 0;
  std::array<double, kTerms> a{};  // highest degree first

  Coefficients() {
    const double pi = 3.14159265358979323846;
    const int M = 2 * kTerms, M2 = 2 * M;
    L = std::sqrt(kTerms / std::sqrt(2.0));
    // f_k for k = -M+1 .. M-1, prefixed with a zero (length M2)
    std::vector<double> f(M2, 0.0);
    for (int k = -M + 1; k <= M - 1; ++k) {
      const double theta = k * pi / M;
      const double t = L * std::tan(0.5 * theta);
      f[k + M] = std::exp(-t * t) * (L * L + t * t);
    }
    // real(fft(fftshift(f))) / M2
    auto shift = [M2](const std::vector<double>& v) {
      std::vector<double> out(M2);
      for (int i = 0; i < M2; ++i) out[i] = v[(i + M2 / 2) % M2];
      return out;
    };
    const std::vector<double> g = shift(f);
    std::vector<double> re(M2);
    for (int k = 0; k < M2; ++k) {
      double s = 0;
      for (int n = 0; n < M2; ++n) s += g[n] * std::cos(2 * pi * k * n / M2);
      re[k] = s;
    }
    const std::vector<double>& c = re;
    // a = flipud(c(2:N+1)) / M2  (1-based indices in the reference code)
    for (int i = 0; i < kTerms; ++i) a[i] = c[kTerms - i] / M2;
  }
};

const Coefficients& coeffs() {
  static const Coefficients c;
  return c;
}

}  // namespace

std::complex<double> faddeeva_w(std::complex<double> z) {
  const Coefficients& c = coeffs();
  const std::complex<double> iz(-z.imag(), z.real());
  const std::complex<double> den = c.L - iz;
  const std::complex<double> Z = (c.L + iz) / den;
  std::complex<double> p = c.a[0];
  for (int i = 1; i < kTerms; ++i) p = p * Z + c.a[i];
  return 2.0 * p / (den * den) + 0.5641895835477563 / den;
}

}  // namespace dstokes

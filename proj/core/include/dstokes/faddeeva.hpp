#pragma once

#include <complex>

namespace dstokes {

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0, by Weideman's
/// rational expansion (N = 36 terms).
std::complex<double> faddeeva_w(std::complex<double> z);

/// w'(z) = -2 z w(z) + 2i / sqrt(pi)
inline std::complex<double> faddeeva_w_prime(std::complex<double> z,
                                             std::complex<double> w) {
  return -2.0 * z * w + std::complex<double>(0.0, 1.1283791670955126);
}

}  // namespace dstokes

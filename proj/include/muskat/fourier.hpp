#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <vector>

#include "muskat/types.hpp"

namespace muskat {

namespace detail {
inline Eigen::FFT<double>& fft_engine() {
  // One engine per thread; it caches kissfft plans keyed by length.
  thread_local Eigen::FFT<double> engine;
  return engine;
}
}  // namespace detail

/// Unscaled forward transform: X_k = sum_j x_j exp(-2*pi*i*j*k/N).
inline VecC fft(const VecC& x) {
  std::vector<Cplx> in(x.data(), x.data() + x.size());
  std::vector<Cplx> out(in.size());
  detail::fft_engine().fwd(out, in);
  return Eigen::Map<const VecC>(out.data(), static_cast<Eigen::Index>(out.size()));
}

/// Inverse transform scaled by 1/N, so ifft(fft(x)) == x.
inline VecC ifft(const VecC& X) {
  std::vector<Cplx> in(X.data(), X.data() + X.size());
  std::vector<Cplx> out(in.size());
  detail::fft_engine().inv(out, in);
  return Eigen::Map<const VecC>(out.data(), static_cast<Eigen::Index>(out.size()));
}

/// Signed wavenumber of FFT bin k for length n (n even): 0,1,...,n/2,-n/2+1,...,-1.
inline int fft_freq(int k, int n) { return (k <= n / 2) ? k : k - n; }

/// Derivative of the trigonometric interpolant, sampled on the same grid.
/// For odd orders the bin at |wavenumber| = n/2 is dropped (its derivative
/// is not representable on the grid); for even orders it is kept.
inline VecC spectral_derivative(const VecC& z, int order) {
  const int n = static_cast<int>(z.size());
  VecC X = fft(z);
  for (int k = 0; k < n; ++k) {
    const int m = fft_freq(k, n);
    if (order % 2 == 1 && 2 * std::abs(m) == n) {
      X[k] = 0.0;
      continue;
    }
    X[k] *= std::pow(Cplx(0.0, static_cast<double>(m)), order);
  }
  return ifft(X);
}

/// Two-thirds rule: zero every mode with |wavenumber| > n/3.
inline VecC dealias_two_thirds(const VecC& z) {
  const int n = static_cast<int>(z.size());
  const int keep = n / 3;
  VecC X = fft(z);
  for (int k = 0; k < n; ++k) {
    if (std::abs(fft_freq(k, n)) > keep) X[k] = 0.0;
  }
  return ifft(X);
}

/// Evaluate the trigonometric interpolant of grid samples z at an arbitrary
/// parameter value.  The bin at |wavenumber| = n/2 is evaluated as a cosine,
/// the symmetric choice.  O(n) per point.
inline Cplx eval_interpolant(const VecC& spectrum_over_n, double theta) {
  const int n = static_cast<int>(spectrum_over_n.size());
  Cplx acc(0.0, 0.0);
  for (int k = 0; k < n; ++k) {
    const int m = fft_freq(k, n);
    if (2 * std::abs(m) == n) {
      acc += spectrum_over_n[k] * std::cos(0.5 * n * theta);
    } else {
      acc += spectrum_over_n[k] * std::exp(Cplx(0.0, m * theta));
    }
  }
  return acc;
}

/// Spectrum scaled to interpolation coefficients (fft(z)/n).
inline VecC interpolation_coefficients(const VecC& z) {
  VecC X = fft(z);
  X /= static_cast<double>(z.size());
  return X;
}

}  // namespace muskat

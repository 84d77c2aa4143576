#pragma once

#include <cmath>

#include "muskat/interface_set.hpp"

namespace muskat {
namespace bie {

// Dense quadrature blocks for the harmonic layer potentials built on
// Phi(x,y) = -(1/2pi) log|x-y|.  Each block maps density values at the
// source nodes to potential values (or normal derivatives) at the target
// nodes; arclength elements are folded into the matrix.  Self interactions
// of the log kernel use the trigonometric product quadrature, everything
// else is plain trapezoid (the kernels are smooth there).

/// Weights R_k of the periodic product quadrature for the factor
/// log(4 sin^2((t-s)/2)): int log(4 sin^2((t_i-s)/2)) f(s) ds
/// ~ sum_j R_{(i-j) mod N} f(t_j), exact for trigonometric polynomials up
/// to the grid limit.  Assembled in O(N log N) via the inverse transform.
inline VecD log_quadrature_weights(int n_nodes) {
  VecC w = VecC::Zero(n_nodes);
  for (int m = 1; m <= n_nodes / 2; ++m) {
    const double v = -kTwoPi / (static_cast<double>(n_nodes) * m);
    w[m] = v;
    w[n_nodes - m] = v;
  }
  const VecC r = ifft(w) * static_cast<double>(n_nodes);
  VecD out(n_nodes);
  for (int k = 0; k < n_nodes; ++k) out[k] = r[k].real();
  return out;
}

/// Single layer on one curve, target = source nodes.  `kernel_shift` adds a
/// constant to the kernel (used to rescale the wall's logarithm so a uniform
/// density never produces the zero potential).
inline MatD single_layer_self(const CurveWork& c, double kernel_shift = 0.0) {
  const int n = c.size();
  const VecD R = log_quadrature_weights(n);
  const double h = kTwoPi / n;
  MatD A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double smooth;
      if (i == j) {
        smooth = -std::log(c.speed[i]) / kTwoPi;
      } else {
        const double chord = std::abs(c.z[i] - c.z[j]);
        const double s = 2.0 * std::sin(0.5 * kTwoPi * (i - j) / n);
        smooth = -std::log(chord * chord / (s * s)) / (4.0 * kPi);
      }
      const int k = ((i - j) % n + n) % n;
      A(i, j) = (-R[k] / (4.0 * kPi) + h * (smooth + kernel_shift)) * c.speed[j];
    }
  }
  return A;
}

/// Single layer, disjoint target and source curves.
inline MatD single_layer_cross(const CurveWork& tgt, const CurveWork& src,
                               double kernel_shift = 0.0) {
  MatD A(tgt.size(), src.size());
  for (int i = 0; i < tgt.size(); ++i)
    for (int j = 0; j < src.size(); ++j) {
      const double r = std::abs(tgt.z[i] - src.z[j]);
      A(i, j) = (-std::log(r) / kTwoPi + kernel_shift) * src.weights[j];
    }
  return A;
}

/// Double layer values, kernel (1/2pi) nu_y.(x-y)/|x-y|^2.  With self = true
/// the smooth diagonal limit H(x)/(4pi) is used (H is the curvature in the
/// convention negative on convex circles).
inline MatD double_layer(const CurveWork& tgt, const CurveWork& src, bool self) {
  MatD A(tgt.size(), src.size());
  for (int i = 0; i < tgt.size(); ++i)
    for (int j = 0; j < src.size(); ++j) {
      if (self && i == j) {
        A(i, j) = src.curvature[j] / (4.0 * kPi) * src.weights[j];
        continue;
      }
      const Cplx d = tgt.z[i] - src.z[j];
      const double r2 = std::norm(d);
      const double ny_dot = src.normal[j].real() * d.real() + src.normal[j].imag() * d.imag();
      A(i, j) = ny_dot / (kTwoPi * r2) * src.weights[j];
    }
  return A;
}

/// Normal derivative of the single layer (the transpose-kernel operator),
/// kernel -(1/2pi) nu_x.(x-y)/|x-y|^2, same diagonal limit as the double
/// layer.  This is the principal-value part; the density jump terms
/// +-phi/2 are added by the callers.
inline MatD single_layer_normal_derivative(const CurveWork& tgt, const CurveWork& src, bool self) {
  MatD A(tgt.size(), src.size());
  for (int i = 0; i < tgt.size(); ++i)
    for (int j = 0; j < src.size(); ++j) {
      if (self && i == j) {
        A(i, j) = tgt.curvature[i] / (4.0 * kPi) * src.weights[j];
        continue;
      }
      const Cplx d = tgt.z[i] - src.z[j];
      const double r2 = std::norm(d);
      const double nx_dot = tgt.normal[i].real() * d.real() + tgt.normal[i].imag() * d.imag();
      A(i, j) = -nx_dot / (kTwoPi * r2) * src.weights[j];
    }
  return A;
}

/// Normal derivative of the double layer between disjoint curves (smooth
/// kernel).  Self interactions go through the arclength identity below.
inline MatD hypersingular_cross(const CurveWork& tgt, const CurveWork& src) {
  MatD A(tgt.size(), src.size());
  for (int i = 0; i < tgt.size(); ++i)
    for (int j = 0; j < src.size(); ++j) {
      const Cplx d = tgt.z[i] - src.z[j];
      const double r2 = std::norm(d);
      const double nx = tgt.normal[i].real() * d.real() + tgt.normal[i].imag() * d.imag();
      const double ny = src.normal[j].real() * d.real() + src.normal[j].imag() * d.imag();
      const double nn = tgt.normal[i].real() * src.normal[j].real() +
                        tgt.normal[i].imag() * src.normal[j].imag();
      A(i, j) = (nn / r2 - 2.0 * ny * nx / (r2 * r2)) / kTwoPi * src.weights[j];
    }
  return A;
}

/// Spectral differentiation with respect to arclength on one curve:
/// diag(1/speed) times the periodic parameter differentiation matrix.
inline MatD arclength_derivative(const CurveWork& c) {
  const int n = c.size();
  const bool even = (n % 2 == 0);
  MatD D(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        D(i, j) = 0.0;
        continue;
      }
      const int k = i - j;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      const double half = 0.5 * kTwoPi * k / n;
      const double base = even ? (0.5 * sign / std::tan(half)) : (0.5 * sign / std::sin(half));
      D(i, j) = base / c.speed[i];
    }
  return D;
}

/// Normal derivative of the double layer on its own curve through the
/// arclength identity T = (d/ds) S (d/ds).
inline MatD hypersingular_self(const CurveWork& c) {
  const MatD D = arclength_derivative(c);
  return D * single_layer_self(c) * D;
}

}  // namespace bie
}  // namespace muskat

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "muskat/fourier.hpp"
#include "muskat/types.hpp"

namespace muskat {

/// A simple closed plane curve, stored as N samples z_j = x_j + i*y_j taken
/// at the uniform parameters theta_j = 2*pi*j/N.  All derived quantities
/// (tangents, curvature, arclength) come from the trigonometric interpolant
/// of these samples, so accuracy is spectral for smooth curves.
///
/// Orientation is counterclockwise (enclosed area positive); the outward
/// unit normal is the tangent rotated by -90 degrees.  The scalar curvature
/// H used throughout is the sign convention with H = -1/R on a circle of
/// radius R, equivalently H = -div of the outward normal along the curve.
class InterfaceCurve {
 public:
  explicit InterfaceCurve(VecC samples) : z_(std::move(samples)) {
    const int n = static_cast<int>(z_.size());
    if (n < 16) throw InvalidGeometryError("curve needs at least 16 nodes");
    if (!z_.allFinite()) throw InvalidGeometryError("curve samples must be finite");
    if (signed_area_of(z_) <= 0.0)
      throw InvalidGeometryError("curve must be oriented counterclockwise");
  }

  static InterfaceCurve circle(const Vec2& center, double radius, int n) {
    if (!(radius > 0.0)) throw InvalidGeometryError("circle radius must be positive");
    VecC z(n);
    for (int j = 0; j < n; ++j) {
      const double th = kTwoPi * j / n;
      z[j] = Cplx(center.x() + radius * std::cos(th), center.y() + radius * std::sin(th));
    }
    return InterfaceCurve(std::move(z));
  }

  int size() const { return static_cast<int>(z_.size()); }
  const VecC& samples() const { return z_; }
  double parameter(int j) const { return kTwoPi * j / size(); }
  Vec2 point(int j) const { return Vec2(z_[j].real(), z_[j].imag()); }

  /// Shoelace area of the sample polygon's spectral interpolant.
  static double signed_area_of(const VecC& z) {
    const int n = static_cast<int>(z.size());
    const VecC dz = spectral_derivative(z, 1);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += std::imag(std::conj(z[j]) * dz[j]);
    return 0.5 * acc * kTwoPi / n;
  }

 private:
  VecC z_;
};

/// Spectral scratch data of one curve: parameter derivatives, frame,
/// curvature, and arclength quadrature weights.  Built once per curve and
/// shared by the geometric queries and the field solver.
struct CurveWork {
  VecC z;
  VecC dz;        ///< dz/dtheta
  VecC d2z;       ///< d^2 z/dtheta^2
  VecD speed;     ///< |dz/dtheta|
  VecC tangent;   ///< unit tangent, complex form
  VecC normal;    ///< outward unit normal = -i * tangent
  VecD curvature; ///< H, with H = -1/R on circles
  VecD weights;   ///< arclength quadrature weights, speed * 2*pi/N
  double perimeter{0.0};
  double area{0.0};

  int size() const { return static_cast<int>(z.size()); }

  static CurveWork build(const InterfaceCurve& curve) {
    CurveWork w;
    w.z = curve.samples();
    const int n = curve.size();
    w.dz = spectral_derivative(w.z, 1);
    w.d2z = spectral_derivative(w.z, 2);
    w.speed.resize(n);
    w.tangent.resize(n);
    w.normal.resize(n);
    w.curvature.resize(n);
    w.weights.resize(n);
    const double h = kTwoPi / n;
    double area_acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double sp = std::abs(w.dz[j]);
      if (!(sp > 1e-14))
        throw InvalidGeometryError("degenerate parameterization (vanishing speed)");
      w.speed[j] = sp;
      w.tangent[j] = w.dz[j] / sp;
      w.normal[j] = Cplx(0.0, -1.0) * w.tangent[j];
      // Signed curvature of the ccw parameterization, negated to give the
      // convention with negative curvature on convex circles.
      const double kappa = std::imag(std::conj(w.dz[j]) * w.d2z[j]) / (sp * sp * sp);
      w.curvature[j] = -kappa;
      w.weights[j] = sp * h;
      area_acc += std::imag(std::conj(w.z[j]) * w.dz[j]);
    }
    w.perimeter = w.speed.sum() * h;
    w.area = 0.5 * area_acc * h;
    return w;
  }
};

namespace detail {

inline double segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  // Closest distance between two segments via clamped projection.
  const Vec2 d1 = a1 - a0, d2 = b1 - b0, r = a0 - b0;
  const double A = d1.dot(d1), E = d2.dot(d2), F = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (A <= 1e-30 && E <= 1e-30) return r.norm();
  if (A <= 1e-30) {
    t = std::clamp(F / E, 0.0, 1.0);
  } else {
    const double C = d1.dot(r);
    if (E <= 1e-30) {
      s = std::clamp(-C / A, 0.0, 1.0);
    } else {
      const double B = d1.dot(d2);
      const double den = A * E - B * B;
      s = den > 1e-30 ? std::clamp((B * F - C * E) / den, 0.0, 1.0) : 0.0;
      t = (B * s + F) / E;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-C / A, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((B - C) / A, 0.0, 1.0);
      }
    }
  }
  return (a0 + s * d1 - (b0 + t * d2)).norm();
}

inline Vec2 to_vec2(Cplx c) { return Vec2(c.real(), c.imag()); }

}  // namespace detail

/// True when no two non-adjacent polygon segments come closer than
/// 1e-8 * perimeter.  Quadratic sweep; N stays small at desk scale.
inline bool is_simple(const InterfaceCurve& curve) {
  const VecC& z = curve.samples();
  const int n = curve.size();
  double per = 0.0;
  for (int j = 0; j < n; ++j) per += std::abs(z[(j + 1) % n] - z[j]);
  const double tol = 1e-8 * per;
  for (int i = 0; i < n; ++i) {
    const Vec2 a0 = detail::to_vec2(z[i]), a1 = detail::to_vec2(z[(i + 1) % n]);
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // wrap-around neighbours
      const Vec2 b0 = detail::to_vec2(z[j]), b1 = detail::to_vec2(z[(j + 1) % n]);
      if (detail::segment_distance(a0, a1, b0, b1) <= tol) return false;
    }
  }
  return true;
}

inline void require_simple(const InterfaceCurve& curve) {
  if (!is_simple(curve)) throw InvalidGeometryError("curve is self-intersecting");
}

/// Pointwise curvature H (negative on convex circles).  Rejects
/// self-intersecting input.
inline VecD curvature(const InterfaceCurve& curve) {
  require_simple(curve);
  return CurveWork::build(curve).curvature;
}

inline double enclosed_area(const InterfaceCurve& curve) {
  require_simple(curve);
  return CurveWork::build(curve).area;
}

inline double perimeter(const InterfaceCurve& curve) {
  require_simple(curve);
  return CurveWork::build(curve).perimeter;
}

/// Circle of radius R around `center`, perturbed in the radial direction by
/// sum of Re(a_m exp(i m theta)) over the given modes.  Requires the total
/// perturbation to stay below R/2 so the result is guaranteed simple.
inline InterfaceCurve make_perturbed_circle(const Vec2& center, double radius,
                                            const std::map<int, Cplx>& modes, int n) {
  if (!(radius > 0.0)) throw InvalidGeometryError("radius must be positive");
  double total = 0.0;
  for (const auto& [m, a] : modes) {
    if (m < 0) throw InvalidGeometryError("perturbation wavenumbers must be nonnegative");
    total += std::abs(a);
  }
  if (!(total < 0.5 * radius))
    throw InvalidGeometryError("perturbation amplitudes must sum below half the radius");
  VecC z(n);
  for (int j = 0; j < n; ++j) {
    const double th = kTwoPi * j / n;
    double r = radius;
    for (const auto& [m, a] : modes) r += std::real(a * std::exp(Cplx(0.0, m * th)));
    z[j] = Cplx(center.x() + r * std::cos(th), center.y() + r * std::sin(th));
  }
  return InterfaceCurve(std::move(z));
}

/// Resample the curve so nodes sit at equal arclength spacing.  Node 0 keeps
/// parameter 0; the curve as a point set is unchanged up to interpolation
/// error of the truncated series (spectrally small).
inline InterfaceCurve resample_uniform_arclength(const InterfaceCurve& curve) {
  const int n = curve.size();
  const VecC coeff_z = interpolation_coefficients(curve.samples());
  const VecC dz = spectral_derivative(curve.samples(), 1);
  VecD speed(n);
  for (int j = 0; j < n; ++j) speed[j] = std::abs(dz[j]);
  const VecC coeff_dz = interpolation_coefficients(dz);

  // Cumulative arclength s(theta) from the speed series: the mean gives the
  // linear part, oscillatory modes integrate termwise.
  VecC sp(n);
  for (int j = 0; j < n; ++j) sp[j] = Cplx(speed[j], 0.0);
  const VecC coeff_speed = interpolation_coefficients(sp);
  const double mean_speed = coeff_speed[0].real();
  const double length = mean_speed * kTwoPi;

  auto arclength = [&](double th) {
    double s = mean_speed * th;
    for (int k = 1; k < n; ++k) {
      const int m = fft_freq(k, n);
      if (2 * std::abs(m) == n) continue;  // dropped, consistent with odd-derivative rule
      const Cplx im(0.0, static_cast<double>(m));
      s += std::real(coeff_speed[k] * (std::exp(im * th) - 1.0) / im);
    }
    return s;
  };
  auto speed_at = [&](double th) { return std::abs(eval_interpolant(coeff_dz, th)); };

  VecC out(n);
  out[0] = curve.samples()[0];
  double prev = 0.0;
  for (int j = 1; j < n; ++j) {
    const double target = length * j / n;
    // s is strictly increasing, so the roots advance with j.  Newton with a
    // shrinking bisection bracket as safeguard.
    double lo = prev, hi = kTwoPi;
    double th = std::clamp(kTwoPi * j / n, lo + 1e-14, hi);
    for (int it = 0; it < 60; ++it) {
      const double f = arclength(th) - target;
      if (std::abs(f) <= 1e-13 * length) break;
      if (f > 0.0) hi = th; else lo = th;
      double next = th - f / speed_at(th);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      th = next;
    }
    out[j] = eval_interpolant(coeff_z, th);
    prev = th;
  }
  return InterfaceCurve(std::move(out));
}

/// Spectral filter: drop curve modes above two thirds of the grid limit.
inline InterfaceCurve dealias_curve(const InterfaceCurve& curve) {
  return InterfaceCurve(dealias_two_thirds(curve.samples()));
}

}  // namespace muskat

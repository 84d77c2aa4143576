#pragma once

#include <limits>
#include <map>
#include <vector>

#include "muskat/curve.hpp"
#include "muskat/types.hpp"

namespace muskat {

/// One or more disjoint closed curves strictly inside a circular wall.
struct InterfaceSet {
  std::vector<InterfaceCurve> components;
  double wall_radius{0.0};
  Vec2 wall_center{0.0, 0.0};

  int component_count() const { return static_cast<int>(components.size()); }

  std::vector<int> node_sizes() const {
    std::vector<int> s;
    s.reserve(components.size());
    for (const auto& c : components) s.push_back(c.size());
    return s;
  }

  int total_nodes() const {
    int t = 0;
    for (const auto& c : components) t += c.size();
    return t;
  }

  BoundaryField zero_field() const { return BoundaryField::zeros(node_sizes()); }
};

/// Per-curve spectral work for the whole family.
struct SetWork {
  std::vector<CurveWork> curves;

  static SetWork build(const InterfaceSet& set) {
    SetWork w;
    w.curves.reserve(set.components.size());
    for (const auto& c : set.components) w.curves.push_back(CurveWork::build(c));
    return w;
  }

  BoundaryField curvature_field(const InterfaceSet& set) const {
    BoundaryField f = set.zero_field();
    for (std::size_t j = 0; j < curves.size(); ++j)
      f.segment(static_cast<int>(j)) = curves[j].curvature;
    return f;
  }

  BoundaryField weight_field(const InterfaceSet& set) const {
    BoundaryField f = set.zero_field();
    for (std::size_t j = 0; j < curves.size(); ++j)
      f.segment(static_cast<int>(j)) = curves[j].weights;
    return f;
  }

  double total_perimeter() const {
    double p = 0.0;
    for (const auto& c : curves) p += c.perimeter;
    return p;
  }

  std::vector<double> areas() const {
    std::vector<double> a;
    a.reserve(curves.size());
    for (const auto& c : curves) a.push_back(c.area);
    return a;
  }
};

namespace detail {

inline double min_distance_between(const VecC& a, const VecC& b) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j) best = std::min(best, std::abs(a[i] - b[j]));
  return best;
}

/// Winding test against the sampled polyline: the accumulated turning of
/// z_k - p is +-2*pi for an enclosed point and 0 outside.
inline bool point_inside(const VecC& z, const Cplx& p) {
  const int n = static_cast<int>(z.size());
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const Cplx a = z[k] - p;
    const Cplx b = z[(k + 1) % n] - p;
    total += std::arg(b / a);
  }
  return std::abs(total) > kPi;
}

}  // namespace detail

/// Full geometric validation: each component simple and counterclockwise,
/// components pairwise disjoint, everything strictly inside the wall.
inline void validate(const InterfaceSet& set) {
  if (set.components.empty()) throw InvalidGeometryError("interface set needs at least one component");
  if (!(set.wall_radius > 0.0)) throw InvalidGeometryError("wall radius must be positive");
  double scale = set.wall_radius;
  for (const auto& c : set.components) {
    require_simple(c);  // orientation already enforced at construction
    for (int j = 0; j < c.size(); ++j) {
      const double d = (c.point(j) - set.wall_center).norm();
      if (!(d < set.wall_radius * (1.0 - 1e-12)))
        throw InvalidGeometryError("component touches or leaves the wall");
    }
  }
  const int m = set.component_count();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double d =
          detail::min_distance_between(set.components[i].samples(), set.components[j].samples());
      if (!(d > 1e-8 * scale)) throw InvalidGeometryError("components touch each other");
    }
}

/// Reject components whose enclosed regions intersect (crossing or nested
/// curves).  O(m^2 N^2) winding tests; meant for input validation at run
/// entry, not for the per-step hot path, where the quadrature separation
/// guard fires long before curves can cross.
inline void require_disjoint_interiors(const InterfaceSet& set) {
  const int m = set.component_count();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const VecC& host = set.components[i].samples();
      const VecC& probe = set.components[j].samples();
      for (int k = 0; k < probe.size(); ++k)
        if (detail::point_inside(host, probe[k]))
          throw InvalidGeometryError("components overlap or are nested");
    }
}

inline std::vector<double> enclosed_areas(const InterfaceSet& set) {
  return SetWork::build(set).areas();
}

inline double total_perimeter(const InterfaceSet& set) {
  return SetWork::build(set).total_perimeter();
}

/// Radius of the largest ball that can roll along every interface on either
/// side without obstruction, estimated from node samples.  Minimum of
///   - the local curvature radius 1/|H|,
///   - half the gap between distinct components,
///   - half the gap to the wall,
///   - half the chord of any same-curve node pair whose arclength separation
///     exceeds three times the chord (a neck forming).
inline double ball_condition_radius(const InterfaceSet& set) {
  const SetWork work = SetWork::build(set);
  double r = std::numeric_limits<double>::infinity();

  for (const auto& cw : work.curves)
    for (int j = 0; j < cw.size(); ++j)
      if (std::abs(cw.curvature[j]) > 1e-300) r = std::min(r, 1.0 / std::abs(cw.curvature[j]));

  const int m = set.component_count();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      r = std::min(r, 0.5 * detail::min_distance_between(set.components[i].samples(),
                                                         set.components[j].samples()));

  for (const auto& c : set.components)
    for (int j = 0; j < c.size(); ++j)
      r = std::min(r, 0.5 * (set.wall_radius - (c.point(j) - set.wall_center).norm()));

  // Same-curve necks: cumulative arclength via the quadrature weights.
  for (const auto& cw : work.curves) {
    const int n = cw.size();
    std::vector<double> s(n + 1, 0.0);
    for (int j = 0; j < n; ++j) s[j + 1] = s[j] + cw.weights[j];
    const double length = s[n];
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double chord = std::abs(cw.z[i] - cw.z[j]);
        double arc = s[j] - s[i];
        arc = std::min(arc, length - arc);
        if (arc >= 3.0 * chord) r = std::min(r, 0.5 * chord);
      }
  }
  return r;
}

struct CircleFit {
  std::vector<Circle> circles;
  std::vector<double> residuals;  ///< max |dist(node, center) - radius| per component
  double max_residual{0.0};
};

/// Best-fit circle per component: algebraic (Kasa) fit followed by a few
/// geometric Gauss-Newton corrections.
inline CircleFit fit_circles(const InterfaceSet& set) {
  CircleFit out;
  for (const auto& comp : set.components) {
    const VecC& z = comp.samples();
    const int n = comp.size();
    Eigen::MatrixXd M(n, 3);
    VecD rhs(n);
    for (int j = 0; j < n; ++j) {
      const double x = z[j].real(), y = z[j].imag();
      M(j, 0) = 2.0 * x;
      M(j, 1) = 2.0 * y;
      M(j, 2) = 1.0;
      rhs[j] = x * x + y * y;
    }
    Eigen::Vector3d sol = (M.transpose() * M).ldlt().solve(M.transpose() * rhs);
    Vec2 c(sol[0], sol[1]);
    double R = std::sqrt(std::max(sol[2] + c.squaredNorm(), 1e-300));

    for (int pass = 0; pass < 4; ++pass) {
      // Gauss-Newton on sum (|z_j - c| - R)^2.
      Eigen::Matrix3d JtJ = Eigen::Matrix3d::Zero();
      Eigen::Vector3d Jtr = Eigen::Vector3d::Zero();
      for (int j = 0; j < n; ++j) {
        const Vec2 p(z[j].real(), z[j].imag());
        const Vec2 d = p - c;
        const double dist = d.norm();
        if (dist < 1e-14) continue;
        const Eigen::Vector3d grad(-d.x() / dist, -d.y() / dist, -1.0);
        const double res = dist - R;
        JtJ += grad * grad.transpose();
        Jtr += grad * res;
      }
      const Eigen::Vector3d delta = JtJ.ldlt().solve(-Jtr);
      c += Vec2(delta[0], delta[1]);
      R += delta[2];
      if (delta.norm() < 1e-14 * std::max(R, 1.0)) break;
    }

    double resid = 0.0;
    for (int j = 0; j < n; ++j) {
      const Vec2 p(z[j].real(), z[j].imag());
      resid = std::max(resid, std::abs((p - c).norm() - R));
    }
    out.circles.push_back(Circle{c, R});
    out.residuals.push_back(resid);
    out.max_residual = std::max(out.max_residual, resid);
  }
  return out;
}

/// Height function over a reference circle: the described curve is
/// center + (R + h(theta)) * e(theta) with e the radial unit vector.
struct NormalGraph {
  Circle reference;
  VecD heights;  ///< sampled at theta_j = 2*pi*j/N

  int size() const { return static_cast<int>(heights.size()); }
};

/// Realize the graph as a curve.  The simplicity threshold requires
/// max|h| + max|dh/dtheta| < ratio * R (default one half), which keeps the
/// radial parameterization injective and the curve simple.
inline InterfaceCurve realize(const NormalGraph& graph, double threshold_ratio = 0.5) {
  const int n = graph.size();
  if (n < 16) throw InvalidGeometryError("graph needs at least 16 samples");
  VecC h(n);
  for (int j = 0; j < n; ++j) h[j] = Cplx(graph.heights[j], 0.0);
  const VecC dh = spectral_derivative(h, 1);
  const double bound = graph.heights.cwiseAbs().maxCoeff() + dh.cwiseAbs().maxCoeff();
  if (!(bound < threshold_ratio * graph.reference.radius))
    throw InvalidGeometryError("heights too large for a graph over the reference circle");
  VecC z(n);
  for (int j = 0; j < n; ++j) {
    const double th = kTwoPi * j / n;
    const double r = graph.reference.radius + graph.heights[j];
    z[j] = Cplx(graph.reference.center.x() + r * std::cos(th),
                graph.reference.center.y() + r * std::sin(th));
  }
  return InterfaceCurve(std::move(z));
}

/// One-sided complex mode amplitudes of the heights: entry m >= 1 holds c_m
/// with h = Re(c_m e^{i m theta}) + ..., entry 0 the mean.  A pure sample
/// h = a cos(m theta) therefore reports amplitude a at wavenumber m.
inline std::map<int, Cplx> mode_amplitudes(const NormalGraph& graph) {
  const int n = graph.size();
  VecC h(n);
  for (int j = 0; j < n; ++j) h[j] = Cplx(graph.heights[j], 0.0);
  const VecC X = fft(h);
  std::map<int, Cplx> out;
  out[0] = X[0] / static_cast<double>(n);
  for (int k = 1; k < (n + 1) / 2; ++k) out[k] = 2.0 * X[k] / static_cast<double>(n);
  // Even grids carry an unpaired top mode; odd grids pair every mode.
  if (n % 2 == 0) out[n / 2] = X[n / 2] / static_cast<double>(n);
  return out;
}

/// Measure the heights of a nearly circular curve over its best-fit circle,
/// assuming nodes are close to uniform in the reference angle.  First-order
/// accurate in the height amplitude; intended for small deviations.
inline NormalGraph measure_graph(const InterfaceCurve& curve, const Circle& reference) {
  const int n = curve.size();
  VecD h(n);
  for (int j = 0; j < n; ++j)
    h[j] = (curve.point(j) - reference.center).norm() - reference.radius;
  return NormalGraph{reference, std::move(h)};
}

}  // namespace muskat

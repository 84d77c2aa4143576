#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include "muskat/operators.hpp"

namespace muskat {

// Linearized analysis around the flows' equilibria: families of circles.
// The evolution linearizes to dh/dt + sigma * G * A h = 0 where A is the
// curvature linearization -(n-1)/R^2 - Laplace-Beltrami on each circle;
// this module assembles L = sigma * G * A, computes its spectrum, and
// carries the counting predictions the spectra are checked against.

/// Multi-circle equilibrium: the jump law admits arbitrary radii, the
/// density-weighted law only families of equal radii.
struct EquilibriumConfig {
  std::vector<Circle> circles;
  double wall_radius = 2.0;
  Vec2 wall_center{0.0, 0.0};
  Model model = Model::Mu;

  void validate() const {
    if (circles.empty()) throw ModelError("equilibrium needs at least one circle");
    if (!(wall_radius > 0)) throw ModelError("wall radius must be positive");
    for (const auto& c : circles) {
      if (!(c.radius > 0)) throw ModelError("circle radii must be positive");
      if ((c.center - wall_center).norm() + c.radius >= wall_radius)
        throw ModelError("equilibrium circle reaches outside the wall");
    }
    for (std::size_t i = 0; i < circles.size(); ++i)
      for (std::size_t j = i + 1; j < circles.size(); ++j) {
        const double d = (circles[i].center - circles[j].center).norm();
        if (d <= circles[i].radius + circles[j].radius)
          throw ModelError("equilibrium circles overlap");
      }
    if (model == Model::MuT) {
      const double r0 = circles.front().radius;
      for (const auto& c : circles)
        if (std::abs(c.radius - r0) > 1e-12 * r0)
          throw ModelError("the density-weighted law is stationary only for equal radii");
    }
  }

  InterfaceSet interface_set(int nodes_per_circle) const {
    InterfaceSet set;
    for (const auto& c : circles)
      set.components.push_back(InterfaceCurve::circle(c.center, c.radius, nodes_per_circle));
    set.wall_radius = wall_radius;
    set.wall_center = wall_center;
    return set;
  }
};

/// Eigenvalue of the curvature linearization -(n-1)/R^2 - Laplace-Beltrami
/// on the sphere of radius R in R^n, on spherical harmonics of degree l:
/// (l(l+n-2) - (n-1)) / R^2.  Degree-1 harmonics (translations) sit in the
/// kernel; constants are mapped negatively.
inline double a_sigma_eigenvalue(int n, double R, int l) {
  if (n < 2) throw ModelError("ambient dimension must be at least 2");
  if (!(R > 0)) throw ModelError("radius must be positive");
  if (l < 0) throw ModelError("mode degree must be nonnegative");
  return (static_cast<double>(l) * (l + n - 2) - (n - 1)) / (R * R);
}

/// Dimension of the equilibrium manifold = kernel of the linearization:
/// the jump law preserves every area (m centers + m radii + ... = m(n+1));
/// the weighted law ties the radii together (mn + 1).
inline int expected_kernel_dim(Model model, int m, int n) {
  if (m < 1 || n < 2) throw ModelError("kernel dimension needs m >= 1, n >= 2");
  return model == Model::Mu ? m * (n + 1) : m * n + 1;
}

/// Number of positive eigenvalues of -L: none for the jump law, m - 1
/// volume-exchange modes for the weighted law.
inline int expected_unstable_count(Model model, int m) {
  if (m < 1) throw ModelError("unstable count needs m >= 1");
  return model == Model::Mu ? 0 : m - 1;
}

/// L = sigma * G * A on the equilibrium geometry, in node space.  Each A
/// block is the circulant spectral matrix of -(1 + d^2/dtheta^2)/R_j^2 on
/// that circle's uniform grid.
inline OperatorMatrix assemble_linearization(const EquilibriumConfig& eq,
                                             const PhysicalParams& params, int n_per_circle) {
  eq.validate();
  params.validate();
  if (params.model != eq.model)
    throw ModelError("equilibrium and parameters disagree on the model");
  const InterfaceSet set = eq.interface_set(n_per_circle);
  const FluxOperator op(set, params);
  const OperatorMatrix g = assemble_matrix(op);

  MatD a = MatD::Zero(g.matrix.rows(), g.matrix.cols());
  // Second-derivative circulant on one component grid, built spectrally.
  const int n = n_per_circle;
  MatD d2(n, n);
  VecC e = VecC::Zero(n);
  for (int j = 0; j < n; ++j) {
    e.setZero();
    e[j] = 1.0;
    const VecC col = spectral_derivative(e, 2);
    for (int i = 0; i < n; ++i) d2(i, j) = col[i].real();
  }
  for (std::size_t j = 0; j < eq.circles.size(); ++j) {
    const double r2 = eq.circles[j].radius * eq.circles[j].radius;
    const int o = g.offsets[j];
    a.block(o, o, n, n) = -(MatD::Identity(n, n) + d2) / r2;
  }

  OperatorMatrix out;
  out.matrix = params.sigma * (g.matrix * a);
  out.weights = g.weights;
  out.offsets = g.offsets;
  out.geometry_tag = g.geometry_tag;
  return out;
}

enum class Classification { NormallyStable, NormallyHyperbolic, Indeterminate };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::NormallyStable: return "normally_stable";
    case Classification::NormallyHyperbolic: return "normally_hyperbolic";
    default: return "indeterminate";
  }
}

/// Spectrum of -L with counts against the theoretical predictions.
struct SpectrumReport {
  std::vector<Cplx> eigenvalues;  ///< of -L, sorted by descending real part
  int kernel_count = 0;
  int unstable_count = 0;
  int stable_count = 0;
  double max_imag = 0.0;
  double spectral_radius = 0.0;
  double threshold = 0.0;
  bool semi_simple = false;
  Classification classification = Classification::Indeterminate;
};

namespace detail {

inline Eigen::Index svd_rank(const MatD& m, double threshold) {
  Eigen::JacobiSVD<MatD> svd(m);
  const VecD s = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > threshold) ++r;
  return r;
}

}  // namespace detail

inline SpectrumReport spectrum(const OperatorMatrix& L, const EquilibriumConfig& eq) {
  Eigen::EigenSolver<MatD> es(L.matrix);
  if (es.info() != Eigen::Success) throw SolverError("eigenvalue iteration failed");
  const VecC lam = es.eigenvalues();

  SpectrumReport rep;
  rep.eigenvalues.resize(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) rep.eigenvalues[i] = -lam[i];
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](const Cplx& a, const Cplx& b) { return a.real() > b.real(); });

  for (const Cplx& z : rep.eigenvalues) {
    rep.spectral_radius = std::max(rep.spectral_radius, std::abs(z));
    rep.max_imag = std::max(rep.max_imag, std::abs(z.imag()));
  }
  rep.threshold = 1e-6 * rep.spectral_radius;
  for (const Cplx& z : rep.eigenvalues) {
    if (std::abs(z) <= rep.threshold) {
      ++rep.kernel_count;
    } else if (z.real() > rep.threshold) {
      ++rep.unstable_count;
    } else {
      ++rep.stable_count;
    }
  }

  // Zero is semi-simple iff squaring L does not enlarge the kernel; both
  // ranks are taken at the kernel threshold.
  rep.semi_simple = detail::svd_rank(L.matrix, rep.threshold) ==
                    detail::svd_rank(MatD(L.matrix * L.matrix), rep.threshold);

  const int m = static_cast<int>(eq.circles.size());
  const int want_kernel = expected_kernel_dim(eq.model, m, 2);
  const int want_unstable = expected_unstable_count(eq.model, m);
  if (rep.unstable_count == 0 && want_unstable == 0 && rep.kernel_count == want_kernel) {
    rep.classification = Classification::NormallyStable;
  } else if (want_unstable > 0 && rep.unstable_count == want_unstable &&
             rep.kernel_count == want_kernel) {
    rep.classification = Classification::NormallyHyperbolic;
  } else {
    rep.classification = Classification::Indeterminate;
  }
  return rep;
}

}  // namespace muskat

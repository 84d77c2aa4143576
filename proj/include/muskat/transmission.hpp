#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "muskat/kernels.hpp"

namespace muskat {

// Boundary-integral solvers for the potential problems behind the two
// evolution laws.  Every solver assembles and factors its system once per
// geometry; repeated right-hand sides then cost one pair of triangular
// substitutions, which is what makes dense operator assembly and time
// stepping affordable.

namespace detail {

inline double node_spacing(const CurveWork& c) { return c.perimeter / c.size(); }

/// Odd node counts keep every representable mode differentiable on the
/// grid; with an even count the top (sawtooth) mode differentiates to zero
/// at the nodes, which silently degrades the tangential-derivative based
/// flux maps.  The solvers therefore insist on odd grids.
inline void require_odd_nodes(const InterfaceSet& set) {
  for (const auto& c : set.components)
    if (c.size() % 2 == 0)
      throw SolverError("flux solvers need odd node counts per component");
}

/// Discretized geometry shared by the solvers: per-component workspaces, a
/// wall discretization, and node offsets into the stacked interface vector.
struct BieGeometry {
  SetWork works;
  CurveWork wall;
  std::vector<int> offsets;  // size m+1, offsets into the stacked vector
  int n_gamma = 0;

  static BieGeometry build(const InterfaceSet& set, int wall_nodes) {
    validate(set);
    require_odd_nodes(set);
    BieGeometry g;
    g.works = SetWork::build(set);
    int nw = wall_nodes;
    if (nw <= 0) {
      nw = 65;
      for (const auto& c : set.components) nw = std::max(nw, c.size());
      if (nw % 2 == 0) ++nw;
    }
    if (nw % 2 == 0)
      throw SolverError("wall discretization needs an odd node count");
    g.wall = CurveWork::build(InterfaceCurve::circle(set.wall_center, set.wall_radius, nw));
    g.offsets.assign(1, 0);
    for (const auto& w : g.works.curves) g.offsets.push_back(g.offsets.back() + w.size());
    g.n_gamma = g.offsets.back();
    require_separation(g, set);
    return g;
  }

  /// Curves closer to each other or to the wall than three node spacings
  /// put the smooth-kernel quadrature outside its accuracy regime; refuse
  /// to produce garbage.
  static void require_separation(const BieGeometry& g, const InterfaceSet& set) {
    const int m = static_cast<int>(g.works.curves.size());
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const double d = detail::min_distance_between(g.works.curves[i].z, g.works.curves[j].z);
        const double thr =
            3.0 * std::max(node_spacing(g.works.curves[i]), node_spacing(g.works.curves[j]));
        if (d < thr) {
          std::ostringstream os;
          os << "components " << i << " and " << j << " are " << d
             << " apart; quadrature needs at least " << thr;
          throw ProximityError(os.str());
        }
      }
    }
    const Cplx cw(set.wall_center.x(), set.wall_center.y());
    for (int i = 0; i < m; ++i) {
      double clearance = std::numeric_limits<double>::infinity();
      for (int a = 0; a < g.works.curves[i].size(); ++a)
        clearance = std::min(clearance, set.wall_radius - std::abs(g.works.curves[i].z[a] - cw));
      const double thr = 3.0 * std::max(node_spacing(g.works.curves[i]), node_spacing(g.wall));
      if (clearance < thr) {
        std::ostringstream os;
        os << "component " << i << " is " << clearance
           << " from the wall; quadrature needs at least " << thr;
        throw ProximityError(os.str());
      }
    }
  }
};

/// Assemble a stacked interface-to-interface block by calling `self` for
/// diagonal blocks and `cross` for distinct curve pairs.
template <typename SelfFn, typename CrossFn>
MatD stack_blocks(const BieGeometry& g, SelfFn self, CrossFn cross) {
  MatD A(g.n_gamma, g.n_gamma);
  const int m = static_cast<int>(g.works.curves.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      MatD blk = (i == j) ? self(g.works.curves[i])
                          : cross(g.works.curves[i], g.works.curves[j]);
      A.block(g.offsets[i], g.offsets[j], blk.rows(), blk.cols()) = blk;
    }
  return A;
}

inline VecD x_dot_normal(const CurveWork& c) {
  VecD v(c.size());
  for (int i = 0; i < c.size(); ++i)
    v[i] = c.z[i].real() * c.normal[i].real() + c.z[i].imag() * c.normal[i].imag();
  return v;
}

inline VecD quarter_norm_sq(const CurveWork& c) {
  VecD v(c.size());
  for (int i = 0; i < c.size(); ++i) v[i] = 0.25 * std::norm(c.z[i]);
  return v;
}

/// ∮ (p x.nu/2 - |x|^2/4 dp/dnu) ds, the boundary form of the domain
/// integral of a harmonic function.
inline double harmonic_volume_integral(const CurveWork& c, const VecD& trace, const VecD& dnu) {
  const VecD xn = x_dot_normal(c);
  const VecD q = quarter_norm_sq(c);
  double s = 0.0;
  for (int i = 0; i < c.size(); ++i)
    s += c.weights[i] * (0.5 * trace[i] * xn[i] - q[i] * dnu[i]);
  return s;
}

}  // namespace detail

/// Flux of the two-phase transmission problem: the potential is harmonic in
/// both phases, jumps by h across the interfaces, carries a continuous
/// normal flux k dp/dnu there, and satisfies a no-flux wall condition.  The
/// interface representation is a double layer with density h plus a single
/// layer with an unknown density; the wall carries a rescaled single layer.
class TwoPhaseJumpSolver {
 public:
  struct Detail {
    BoundaryField flux;       // -k dp/dnu on the interfaces
    double jump_defect = 0;   // max |k2 dp_ext - k1 dp_int|
    double wall_defect = 0;   // max |dp/dnu| on the wall
    double mean_value = 0;    // domain mean of the potential
  };

  TwoPhaseJumpSolver(const InterfaceSet& set, const PhysicalParams& params, int wall_nodes = 0)
      : set_(set), params_(params), geo_(detail::BieGeometry::build(set, wall_nodes)) {
    params.validate();
    const double shift = std::log(2.0 * set.wall_radius) / kTwoPi;
    const auto& wall = geo_.wall;

    kp_gg_ = detail::stack_blocks(
        geo_, [](const CurveWork& c) { return bie::single_layer_normal_derivative(c, c, true); },
        [](const CurveWork& t, const CurveWork& s) {
          return bie::single_layer_normal_derivative(t, s, false);
        });
    t_gg_ = detail::stack_blocks(
        geo_, [](const CurveWork& c) { return bie::hypersingular_self(c); },
        [](const CurveWork& t, const CurveWork& s) { return bie::hypersingular_cross(t, s); });
    wp_gw_.resize(geo_.n_gamma, wall.size());
    hyp_wg_.resize(wall.size(), geo_.n_gamma);
    kp_wg_.resize(wall.size(), geo_.n_gamma);
    const int m = static_cast<int>(geo_.works.curves.size());
    for (int i = 0; i < m; ++i) {
      const auto& c = geo_.works.curves[i];
      wp_gw_.block(geo_.offsets[i], 0, c.size(), wall.size()) =
          bie::single_layer_normal_derivative(c, wall, false);
      hyp_wg_.block(0, geo_.offsets[i], wall.size(), c.size()) = bie::hypersingular_cross(wall, c);
      kp_wg_.block(0, geo_.offsets[i], wall.size(), c.size()) =
          bie::single_layer_normal_derivative(wall, c, false);
    }
    kp_ww_ = bie::single_layer_normal_derivative(wall, wall, true);

    // Value blocks, used for the mean of the potential.
    dpv_gg_ = detail::stack_blocks(
        geo_, [](const CurveWork& c) { return bie::double_layer(c, c, true); },
        [](const CurveWork& t, const CurveWork& s) { return bie::double_layer(t, s, false); });
    s_gg_ = detail::stack_blocks(
        geo_, [](const CurveWork& c) { return bie::single_layer_self(c); },
        [](const CurveWork& t, const CurveWork& s) { return bie::single_layer_cross(t, s); });
    st_gw_.resize(geo_.n_gamma, wall.size());
    d_wg_.resize(wall.size(), geo_.n_gamma);
    s_wg_.resize(wall.size(), geo_.n_gamma);
    for (int i = 0; i < m; ++i) {
      const auto& c = geo_.works.curves[i];
      st_gw_.block(geo_.offsets[i], 0, c.size(), wall.size()) =
          bie::single_layer_cross(c, wall, shift);
      d_wg_.block(0, geo_.offsets[i], wall.size(), c.size()) = bie::double_layer(wall, c, false);
      s_wg_.block(0, geo_.offsets[i], wall.size(), c.size()) = bie::single_layer_cross(wall, c);
    }
    st_ww_ = bie::single_layer_self(wall, shift);

    const int ng = geo_.n_gamma;
    const int nw = wall.size();
    const double k1 = params.k1, k2 = params.k2;
    MatD A(ng + nw, ng + nw);
    A.topLeftCorner(ng, ng) = -(k2 - k1) * kp_gg_;
    A.topLeftCorner(ng, ng).diagonal().array() += 0.5 * (k1 + k2);
    A.topRightCorner(ng, nw) = -(k2 - k1) * wp_gw_;
    A.bottomLeftCorner(nw, ng) = kp_wg_;
    A.bottomRightCorner(nw, nw) = kp_ww_;
    A.bottomRightCorner(nw, nw).diagonal().array() += 0.5;
    // The wall equation alone is a compatible interior Neumann condition and
    // keeps the constant density in its kernel; pin the gauge by adding the
    // rank-one term (1/|wall|) * ones * weights^T.
    const double eta = 1.0 / wall.perimeter;
    for (int r = 0; r < nw; ++r)
      for (int cidx = 0; cidx < nw; ++cidx) A(ng + r, ng + cidx) += eta * wall.weights[cidx];
    lu_.compute(A);
    if (lu_.rcond() < 1e-13) throw SolverError("transmission system is numerically singular");
  }

  /// Interface flux -k dp/dnu produced by the jump datum h.
  BoundaryField flux(const BoundaryField& h) const { return solve(h).flux; }

  Detail solve(const BoundaryField& h) const {
    check_shape(h);
    const int ng = geo_.n_gamma;
    const int nw = geo_.wall.size();
    const double k1 = params_.k1, k2 = params_.k2;

    VecD rhs(ng + nw);
    const VecD th = t_gg_ * h.values;
    rhs.head(ng) = (k2 - k1) * th;
    rhs.tail(nw) = -(hyp_wg_ * h.values);
    const VecD x = lu_.solve(rhs);
    const VecD psi = x.head(ng);
    const VecD mu = x.tail(nw);

    const VecD common = th + kp_gg_ * psi + wp_gw_ * mu;
    const VecD dnu_int = common + 0.5 * psi;
    const VecD dnu_ext = common - 0.5 * psi;

    Detail out;
    out.flux.values = -0.5 * (k2 * dnu_ext + k1 * dnu_int);
    out.flux.offsets = geo_.offsets;
    out.jump_defect = (k2 * dnu_ext - k1 * dnu_int).cwiseAbs().maxCoeff();
    const VecD wall_dnu = hyp_wg_ * h.values + kp_wg_ * psi + kp_ww_ * mu + 0.5 * mu;
    out.wall_defect = wall_dnu.cwiseAbs().maxCoeff();

    // Mean of the potential over the wall disk, from the boundary identity
    // int p = ∮ (p x.nu/2 - |x|^2/4 dp/dnu) applied phase by phase.
    const VecD p_int = dpv_gg_ * h.values - 0.5 * h.values + s_gg_ * psi + st_gw_ * mu;
    const VecD p_ext = p_int + h.values;
    const VecD p_wall = d_wg_ * h.values + s_wg_ * psi + st_ww_ * mu;
    double total = detail::harmonic_volume_integral(geo_.wall, p_wall, wall_dnu);
    const int m = static_cast<int>(geo_.works.curves.size());
    for (int i = 0; i < m; ++i) {
      const auto& c = geo_.works.curves[i];
      const int o = geo_.offsets[i], n = c.size();
      total += detail::harmonic_volume_integral(c, p_int.segment(o, n), dnu_int.segment(o, n));
      total -= detail::harmonic_volume_integral(c, p_ext.segment(o, n), dnu_ext.segment(o, n));
    }
    out.mean_value = total / (kPi * set_.wall_radius * set_.wall_radius);
    return out;
  }

  const detail::BieGeometry& geometry() const { return geo_; }

 private:
  void check_shape(const BoundaryField& h) const {
    if (h.offsets != geo_.offsets)
      throw SolverError("boundary field layout does not match the solver geometry");
  }

  InterfaceSet set_;
  PhysicalParams params_;
  detail::BieGeometry geo_;
  MatD kp_gg_, t_gg_, wp_gw_, hyp_wg_, kp_wg_, kp_ww_;
  MatD dpv_gg_, s_gg_, st_gw_, d_wg_, s_wg_, st_ww_;
  Eigen::PartialPivLU<MatD> lu_;
};

/// Interior Dirichlet flux map: the potential is harmonic inside each
/// component with boundary values h; returns k1 dp/dnu.  Components do not
/// interact, so the solver holds one factored double-layer system apiece.
class InteriorDirichletSolver {
 public:
  InteriorDirichletSolver(const InterfaceSet& set, double k1) : k1_(k1) {
    validate(set);
    detail::require_odd_nodes(set);
    if (!(k1 > 0)) throw ModelError("permeability must be positive");
    works_ = SetWork::build(set);
    offsets_.assign(1, 0);
    for (const auto& c : works_.curves) {
      offsets_.push_back(offsets_.back() + c.size());
      MatD A = bie::double_layer(c, c, true);
      A.diagonal().array() -= 0.5;
      systems_.emplace_back(A);
      t_blocks_.push_back(bie::hypersingular_self(c));
    }
  }

  BoundaryField flux(const BoundaryField& h) const {
    if (h.offsets != offsets_)
      throw SolverError("boundary field layout does not match the solver geometry");
    BoundaryField out;
    out.offsets = offsets_;
    out.values.resize(offsets_.back());
    for (std::size_t i = 0; i < systems_.size(); ++i) {
      const int o = offsets_[i], n = offsets_[i + 1] - offsets_[i];
      const VecD phi = systems_[i].solve(h.values.segment(o, n));
      out.values.segment(o, n) = k1_ * (t_blocks_[i] * phi);
    }
    return out;
  }

 private:
  double k1_;
  SetWork works_;
  std::vector<int> offsets_;
  std::vector<Eigen::PartialPivLU<MatD>> systems_;
  std::vector<MatD> t_blocks_;
};

/// Exterior Dirichlet flux map: the potential is harmonic between the
/// interfaces and the wall, takes boundary values h on the interfaces and
/// has no flux through the wall; returns -k2 dp/dnu on the interfaces.
/// A combined double-plus-single layer keeps the system uniquely solvable.
class ExteriorDirichletSolver {
 public:
  ExteriorDirichletSolver(const InterfaceSet& set, double k2, int wall_nodes = 0)
      : k2_(k2), geo_(detail::BieGeometry::build(set, wall_nodes)) {
    if (!(k2 > 0)) throw ModelError("permeability must be positive");
    const double shift = std::log(2.0 * set.wall_radius) / kTwoPi;
    const auto& wall = geo_.wall;
    const int ng = geo_.n_gamma, nw = wall.size();

    comb_gg_ = detail::stack_blocks(
                   geo_,
                   [](const CurveWork& c) {
                     return MatD(bie::double_layer(c, c, true) + bie::single_layer_self(c));
                   },
                   [](const CurveWork& t, const CurveWork& s) {
                     return MatD(bie::double_layer(t, s, false) + bie::single_layer_cross(t, s));
                   });
    t_gg_ = detail::stack_blocks(
        geo_, [](const CurveWork& c) { return bie::hypersingular_self(c); },
        [](const CurveWork& t, const CurveWork& s) { return bie::hypersingular_cross(t, s); });
    kp_gg_ = detail::stack_blocks(
        geo_, [](const CurveWork& c) { return bie::single_layer_normal_derivative(c, c, true); },
        [](const CurveWork& t, const CurveWork& s) {
          return bie::single_layer_normal_derivative(t, s, false);
        });
    st_gw_.resize(ng, nw);
    wp_gw_.resize(ng, nw);
    dn_wg_.resize(nw, ng);
    const int m = static_cast<int>(geo_.works.curves.size());
    for (int i = 0; i < m; ++i) {
      const auto& c = geo_.works.curves[i];
      st_gw_.block(geo_.offsets[i], 0, c.size(), nw) = bie::single_layer_cross(c, wall, shift);
      wp_gw_.block(geo_.offsets[i], 0, c.size(), nw) =
          bie::single_layer_normal_derivative(c, wall, false);
      dn_wg_.block(0, geo_.offsets[i], nw, c.size()) =
          MatD(bie::hypersingular_cross(wall, c) +
               bie::single_layer_normal_derivative(wall, c, false));
    }
    MatD kp_ww = bie::single_layer_normal_derivative(wall, wall, true);

    MatD A(ng + nw, ng + nw);
    A.topLeftCorner(ng, ng) = comb_gg_;
    A.topLeftCorner(ng, ng).diagonal().array() += 0.5;
    A.topRightCorner(ng, nw) = st_gw_;
    A.bottomLeftCorner(nw, ng) = dn_wg_;
    A.bottomRightCorner(nw, nw) = kp_ww;
    A.bottomRightCorner(nw, nw).diagonal().array() += 0.5;
    lu_.compute(A);
    if (lu_.rcond() < 1e-13) throw SolverError("exterior Dirichlet system is numerically singular");
  }

  BoundaryField flux(const BoundaryField& h) const {
    if (h.offsets != geo_.offsets)
      throw SolverError("boundary field layout does not match the solver geometry");
    const int ng = geo_.n_gamma, nw = geo_.wall.size();
    VecD rhs(ng + nw);
    rhs.head(ng) = h.values;
    rhs.tail(nw).setZero();
    const VecD x = lu_.solve(rhs);
    const VecD phi = x.head(ng);
    const VecD mu = x.tail(nw);
    BoundaryField out;
    out.offsets = geo_.offsets;
    out.values = -k2_ * (t_gg_ * phi + kp_gg_ * phi - 0.5 * phi + wp_gw_ * mu);
    return out;
  }

  const detail::BieGeometry& geometry() const { return geo_; }

 private:
  double k2_;
  detail::BieGeometry geo_;
  MatD comb_gg_, t_gg_, kp_gg_, st_gw_, wp_gw_, dn_wg_;
  Eigen::PartialPivLU<MatD> lu_;
};

/// Density-weighted one-phase flux combination used by the second model:
/// (rho1^2 S1 + rho2^2 S2) / (rho2 - rho1)^2.
class WeightedOnePhaseSolver {
 public:
  WeightedOnePhaseSolver(const InterfaceSet& set, const PhysicalParams& params, int wall_nodes = 0)
      : params_(params),
        interior_(set, params.k1),
        exterior_(set, params.k2, wall_nodes) {
    params.validate();
    if (params.model != Model::MuT)
      throw ModelError("weighted one-phase solver is specific to the density-weighted model");
  }

  BoundaryField flux(const BoundaryField& h) const {
    const BoundaryField f1 = interior_.flux(h);
    const BoundaryField f2 = exterior_.flux(h);
    const double j = params_.density_jump();
    BoundaryField out = f1;
    out.values = (params_.rho1 * params_.rho1 * f1.values +
                  params_.rho2 * params_.rho2 * f2.values) /
                 (j * j);
    return out;
  }

  const InteriorDirichletSolver& interior() const { return interior_; }
  const ExteriorDirichletSolver& exterior() const { return exterior_; }

 private:
  PhysicalParams params_;
  InteriorDirichletSolver interior_;
  ExteriorDirichletSolver exterior_;
};

/// Closed-form eigenvalues of the flux maps on the concentric annulus: a
/// circle of radius R centered at the wall center, wall radius R_wall.  The
/// datum cos(m theta) maps to eigenvalue(m) * cos(m theta).
inline double annulus_eigenvalue(Model model, int m, double R, double R_wall,
                                 const PhysicalParams& params) {
  if (!(R > 0) || !(R_wall > R)) throw ModelError("annulus requires 0 < R < R_wall");
  if (m < 0) throw ModelError("mode index must be nonnegative");
  if (m == 0) return 0.0;
  const double q = std::pow(R / R_wall, 2.0 * m);
  if (model == Model::Mu) {
    return (m / R) * params.k1 * params.k2 * (1.0 - q) /
           (params.k1 * (1.0 + q) + params.k2 * (1.0 - q));
  }
  const double s1 = params.k1 * m / R;
  const double s2 = params.k2 * (m / R) * (1.0 - q) / (1.0 + q);
  const double j = params.density_jump();
  return (params.rho1 * params.rho1 * s1 + params.rho2 * params.rho2 * s2) / (j * j);
}

}  // namespace muskat

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "muskat/transmission.hpp"

namespace muskat {

// The two evolution laws share the shape V = sigma * G(curvature); they
// differ only in which flux map plays the role of G.  FluxOperator prepares
// the right solver once per geometry and exposes repeated applications.

class FluxOperator {
 public:
  FluxOperator(const InterfaceSet& set, const PhysicalParams& params, int wall_nodes = 0)
      : set_(set), params_(params) {
    params.validate();
    if (params.model == Model::Mu) {
      jump_.emplace(set, params, wall_nodes);
    } else {
      weighted_.emplace(set, params, wall_nodes);
    }
    works_ = SetWork::build(set);
    const auto sizes = set.node_sizes();
    offsets_.assign(1, 0);
    for (int s : sizes) offsets_.push_back(offsets_.back() + s);
  }

  /// Apply the flux map G to a boundary datum.
  BoundaryField apply(const BoundaryField& h) const {
    return jump_ ? jump_->flux(h) : weighted_->flux(h);
  }

  /// Curvature of the current interfaces as a boundary field.
  BoundaryField curvature() const { return works_.curvature_field(set_); }

  /// Arclength weights as a boundary field.
  BoundaryField weights() const { return works_.weight_field(set_); }

  /// Normal velocity sigma * G(curvature) of the interface evolution.
  BoundaryField normal_velocity() const {
    BoundaryField v = apply(curvature());
    v.values *= params_.sigma;
    return v;
  }

  const InterfaceSet& set() const { return set_; }
  const PhysicalParams& params() const { return params_; }
  const SetWork& works() const { return works_; }
  const std::vector<int>& offsets() const { return offsets_; }
  int size() const { return offsets_.back(); }

 private:
  InterfaceSet set_;
  PhysicalParams params_;
  SetWork works_;
  std::vector<int> offsets_;
  std::optional<TwoPhaseJumpSolver> jump_;
  std::optional<WeightedOnePhaseSolver> weighted_;
};

/// Deterministic identifier of an interface set: component count, node
/// counts, and an FNV-1a hash of the node coordinates and wall data.
inline std::string geometry_tag(const InterfaceSet& set) {
  std::uint64_t h = 1469598103934665603ull;
  const auto eat = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffull;
      h *= 1099511628211ull;
    }
  };
  std::string sizes;
  for (const auto& comp : set.components) {
    sizes += sizes.empty() ? "n" : "x";
    sizes += std::to_string(comp.size());
    for (int j = 0; j < comp.size(); ++j) {
      eat(comp.samples()[j].real());
      eat(comp.samples()[j].imag());
    }
  }
  eat(set.wall_radius);
  eat(set.wall_center.x());
  eat(set.wall_center.y());
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return "m" + std::to_string(set.components.size()) + "-" + sizes + "-" + hex;
}

/// Dense matrix representation of a flux map together with the arclength
/// weights that make it self-adjoint.
struct OperatorMatrix {
  MatD matrix;
  VecD weights;
  std::vector<int> offsets;
  std::string geometry_tag;

  /// Relative departure from self-adjointness in the weighted inner
  /// product: max |WG - (WG)^T| / max |WG|.
  double symmetry_defect() const {
    const MatD wg = weights.asDiagonal() * matrix;
    const double scale = wg.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (wg - wg.transpose()).cwiseAbs().maxCoeff() / scale;
  }

  /// Eigenvalues of the symmetrized similarity transform
  /// W^{1/2} G W^{-1/2}, ascending.  Real by construction; they agree with
  /// the spectrum of G itself up to the symmetry defect.
  VecD spectrum() const {
    const VecD r = weights.cwiseSqrt();
    MatD b = r.asDiagonal() * matrix;
    for (int j = 0; j < b.cols(); ++j) b.col(j) /= r[j];
    const MatD sym = 0.5 * (b + b.transpose());
    Eigen::SelfAdjointEigenSolver<MatD> es(sym);
    if (es.info() != Eigen::Success) throw SolverError("eigenvalue iteration failed");
    return es.eigenvalues();
  }
};

/// Materialize the flux map column by column; the factorization prepared by
/// the operator makes each column one pair of triangular solves.
inline OperatorMatrix assemble_matrix(const FluxOperator& op) {
  const int n = op.size();
  OperatorMatrix out;
  out.matrix.resize(n, n);
  out.offsets = op.offsets();
  out.weights = op.weights().values;
  out.geometry_tag = geometry_tag(op.set());
  BoundaryField e = op.set().zero_field();
  for (int j = 0; j < n; ++j) {
    e.values.setZero();
    e.values[j] = 1.0;
    out.matrix.col(j) = op.apply(e).values;
  }
  return out;
}

/// Area rates dA_j/dt = ∮_j V ds induced by a normal velocity field.
struct PhaseFlux {
  std::vector<double> per_component;
  double total = 0.0;
};

inline PhaseFlux phase_flux(const FluxOperator& op, const BoundaryField& v) {
  PhaseFlux out;
  const BoundaryField w = op.weights();
  const int m = static_cast<int>(op.set().components.size());
  for (int j = 0; j < m; ++j) {
    const double a = (w.segment(j).array() * v.segment(j).array()).sum();
    out.per_component.push_back(a);
    out.total += a;
  }
  return out;
}

}  // namespace muskat

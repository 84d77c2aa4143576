#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace muskat {

using Vec2 = Eigen::Vector2d;
using Cplx = std::complex<double>;
using VecC = Eigen::VectorXcd;
using VecD = Eigen::VectorXd;
using MatD = Eigen::MatrixXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A curve or curve family violates a geometric precondition
/// (self-intersection, wrong orientation, components touching, ...).
class InvalidGeometryError : public Error {
 public:
  using Error::Error;
};

/// The field solver could not produce a usable solution.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Interfaces came closer than the quadrature can resolve.  Raised by the
/// field solver; the time stepper turns it into a structured termination.
class ProximityError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Configuration file or parameter problem (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Requested time step exceeds the stability bound.
class CflError : public Error {
 public:
  using Error::Error;
};

/// An operation was asked of the wrong flow model.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Which flow drives the interface: Mu keeps both bulk volumes, MuT allows
/// mass transfer across the interface.
enum class Model { Mu, MuT };

inline const char* to_string(Model m) { return m == Model::Mu ? "mu" : "mut"; }

inline Model model_from_string(const std::string& s) {
  if (s == "mu") return Model::Mu;
  if (s == "mut") return Model::MuT;
  throw ConfigError("unknown model '" + s + "' (expected \"mu\" or \"mut\")");
}

struct Circle {
  Vec2 center{0.0, 0.0};
  double radius{1.0};
};

/// Physical constants of a run.  k1/k2 are the mobilities of the disperse
/// and continuous phase, rho1/rho2 their densities (only used by MuT),
/// sigma the surface tension coefficient.
struct PhysicalParams {
  double sigma{1.0};
  double k1{1.0};
  double k2{1.0};
  double rho1{1.0};
  double rho2{2.0};
  Model model{Model::Mu};

  double density_jump() const { return rho2 - rho1; }

  /// Mobility scale of the highest-frequency mode, used by the step-size
  /// rule.  For MuT the densities enter the symbol of the flux operator.
  double effective_mobility() const {
    if (model == Model::Mu) return std::max(k1, k2);
    const double j = density_jump();
    return (rho1 * rho1 * k1 + rho2 * rho2 * k2) / (j * j);
  }

  void validate() const {
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (!(k1 > 0.0) || !(k2 > 0.0)) throw ConfigError("mobilities k1,k2 must be positive");
    if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw ConfigError("densities rho1,rho2 must be positive");
    if (model == Model::MuT && rho1 == rho2)
      throw ConfigError("the mass-transfer model needs distinct phase densities");
  }
};

/// Scalar node samples over all components of an interface family,
/// concatenated component by component.
struct BoundaryField {
  VecD values;
  std::vector<int> offsets;  ///< size m+1, offsets[j] = first node of component j

  BoundaryField() : offsets{0} {}
  BoundaryField(VecD v, std::vector<int> off) : values(std::move(v)), offsets(std::move(off)) {}

  static BoundaryField zeros(const std::vector<int>& sizes) {
    std::vector<int> off(sizes.size() + 1, 0);
    for (std::size_t j = 0; j < sizes.size(); ++j) off[j + 1] = off[j] + sizes[j];
    return BoundaryField(VecD::Zero(off.back()), off);
  }

  int components() const { return static_cast<int>(offsets.size()) - 1; }
  int size() const { return static_cast<int>(values.size()); }
  int component_size(int j) const { return offsets[j + 1] - offsets[j]; }

  auto segment(int j) { return values.segment(offsets[j], component_size(j)); }
  auto segment(int j) const { return values.segment(offsets[j], component_size(j)); }
};

}  // namespace muskat

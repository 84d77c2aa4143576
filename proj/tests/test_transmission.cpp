#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "muskat/transmission.hpp"

using namespace muskat;

namespace {

InterfaceSet annulus(double R, double R_wall, int n) {
  InterfaceSet set;
  set.components.push_back(InterfaceCurve::circle({0.0, 0.0}, R, n));
  set.wall_radius = R_wall;
  return set;
}

PhysicalParams params_mu(double k1 = 1.0, double k2 = 1.0) {
  PhysicalParams p;
  p.sigma = 1.0;
  p.k1 = k1;
  p.k2 = k2;
  p.rho1 = 2.0;
  p.rho2 = 1.0;
  p.model = Model::Mu;
  return p;
}

PhysicalParams params_mut(double rho1 = 1.0, double rho2 = 2.0) {
  PhysicalParams p;
  p.sigma = 1.0;
  p.k1 = 1.0;
  p.k2 = 1.0;
  p.rho1 = rho1;
  p.rho2 = rho2;
  p.model = Model::MuT;
  return p;
}

BoundaryField cos_mode(const InterfaceSet& set, int m, double amp = 1.0) {
  BoundaryField f = set.zero_field();
  for (std::size_t j = 0; j < set.components.size(); ++j) {
    const auto& c = set.components[j];
    auto seg = f.segment(static_cast<int>(j));
    for (int i = 0; i < c.size(); ++i) seg[i] = amp * std::cos(m * c.parameter(i));
  }
  return f;
}

double mode_error(const BoundaryField& got, const InterfaceSet& set, int m, double lambda) {
  double err = 0.0;
  for (std::size_t j = 0; j < set.components.size(); ++j) {
    const auto& c = set.components[j];
    auto seg = got.segment(static_cast<int>(j));
    for (int i = 0; i < c.size(); ++i)
      err = std::max(err, std::abs(seg[i] - lambda * std::cos(m * c.parameter(i))));
  }
  return err;
}

}  // namespace

TEST_CASE("log quadrature integrates the periodic log factor exactly") {
  // int_0^{2pi} log(4 sin^2(t/2)) cos(m s) ds = -2pi/m cos(m t), and 0 for
  // the constant; check the weights against both.
  const int n = 64;
  const VecD R = bie::log_quadrature_weights(n);
  for (int m : {1, 2, 5, 11}) {
    for (int i : {0, 3, 17}) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        const int k = ((i - j) % n + n) % n;
        acc += R[k] * std::cos(m * kTwoPi * j / n);
      }
      const double exact = -kTwoPi / m * std::cos(m * kTwoPi * i / n);
      REQUIRE(std::abs(acc - exact) < 1e-12);
    }
  }
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += R[j];
  REQUIRE(std::abs(acc) < 1e-12);
}

TEST_CASE("single layer on the unit circle has eigenvalues 1/(2m)") {
  const auto curve = InterfaceCurve::circle({0.0, 0.0}, 1.0, 64);
  const auto w = CurveWork::build(curve);
  const MatD S = bie::single_layer_self(w);
  for (int m : {1, 2, 3, 7}) {
    VecD f(w.size()), expect(w.size());
    for (int i = 0; i < w.size(); ++i) {
      f[i] = std::cos(m * kTwoPi * i / w.size());
      expect[i] = f[i] / (2.0 * m);
    }
    REQUIRE(((S * f) - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
  // Constant density on radius R: potential -R log R on the circle itself.
  const auto big = CurveWork::build(InterfaceCurve::circle({0.0, 0.0}, 1.7, 64));
  const MatD Sb = bie::single_layer_self(big);
  const VecD ones = VecD::Ones(big.size());
  const double expect = -1.7 * std::log(1.7);
  REQUIRE(((Sb * ones).array() - expect).abs().maxCoeff() < 1e-12);
}

TEST_CASE("double layer reproduces the interior/exterior/boundary constants") {
  const auto w = CurveWork::build(InterfaceCurve::circle({0.3, -0.2}, 1.0, 64));
  const VecD ones = VecD::Ones(w.size());

  // Principal value of D applied to 1 is -1/2 on the curve.
  const MatD Dpv = bie::double_layer(w, w, true);
  REQUIRE(((Dpv * ones).array() + 0.5).abs().maxCoeff() < 1e-12);

  // Off-curve values: -1 inside, 0 outside.
  const auto probe_in = CurveWork::build(InterfaceCurve::circle({0.3, -0.2}, 0.4, 32));
  const auto probe_out = CurveWork::build(InterfaceCurve::circle({0.3, -0.2}, 1.9, 32));
  REQUIRE(((bie::double_layer(probe_in, w, false) * ones).array() + 1.0).abs().maxCoeff() < 1e-12);
  REQUIRE((bie::double_layer(probe_out, w, false) * ones).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hypersingular blocks satisfy the arclength identity on modes") {
  const auto w = CurveWork::build(InterfaceCurve::circle({0.0, 0.0}, 1.0, 64));
  const MatD T = bie::hypersingular_self(w);
  for (int m : {1, 2, 4}) {
    VecD f(w.size());
    for (int i = 0; i < w.size(); ++i) f[i] = std::cos(m * kTwoPi * i / w.size());
    // T cos(m theta) = -(m/2) cos(m theta) on the unit circle.
    REQUIRE(((T * f) + 0.5 * m * f).cwiseAbs().maxCoeff() < 1e-11);
  }
  const VecD ones = VecD::Ones(w.size());
  REQUIRE((T * ones).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("concentric geometry: two-phase flux matches the closed form") {
  const PhysicalParams p = params_mu();
  const InterfaceSet set = annulus(1.0, 2.0, 65);
  const TwoPhaseJumpSolver solver(set, p, 65);

  SECTION("pinned value at mode 2") {
    const double lambda = annulus_eigenvalue(Model::Mu, 2, 1.0, 2.0, p);
    REQUIRE(lambda == Catch::Approx(15.0 / 16.0).margin(1e-15));
    const auto detail = solver.solve(cos_mode(set, 2));
    REQUIRE(mode_error(detail.flux, set, 2, 15.0 / 16.0) < 1e-10);
    REQUIRE(detail.jump_defect < 1e-10);
    REQUIRE(detail.wall_defect < 1e-10);
  }

  SECTION("modes 1..8 at fine resolution") {
    const InterfaceSet fine = annulus(1.0, 2.0, 257);
    const TwoPhaseJumpSolver fs(fine, p, 257);
    for (int m = 1; m <= 8; ++m) {
      const double lambda = annulus_eigenvalue(Model::Mu, m, 1.0, 2.0, p);
      REQUIRE(mode_error(fs.flux(cos_mode(fine, m)), fine, m, lambda) < 1e-6);
    }
  }

  SECTION("constant jump produces no flux") {
    BoundaryField h = set.zero_field();
    h.values.setConstant(3.7);
    REQUIRE(solver.flux(h).values.cwiseAbs().maxCoeff() < 1e-11);
  }

  SECTION("distinct permeabilities") {
    const PhysicalParams p2 = params_mu(2.0, 0.5);
    const TwoPhaseJumpSolver s2(set, p2, 65);
    for (int m : {1, 3}) {
      const double lambda = annulus_eigenvalue(Model::Mu, m, 1.0, 2.0, p2);
      REQUIRE(mode_error(s2.flux(cos_mode(set, m)), set, m, lambda) < 1e-9);
    }
  }
}

TEST_CASE("concentric geometry: one-phase flux maps match the closed forms") {
  const InterfaceSet set = annulus(1.0, 2.0, 65);

  SECTION("interior map gives k1 m cos(m theta)") {
    const InteriorDirichletSolver s1(set, 1.0);
    for (int m : {1, 2, 5}) {
      REQUIRE(mode_error(s1.flux(cos_mode(set, m)), set, m, static_cast<double>(m)) < 1e-10);
    }
    const InteriorDirichletSolver s1k(set, 3.0);
    REQUIRE(mode_error(s1k.flux(cos_mode(set, 2)), set, 2, 6.0) < 1e-10);
  }

  SECTION("exterior map pinned value 30/17 at mode 2") {
    const ExteriorDirichletSolver s2(set, 1.0, 65);
    REQUIRE(mode_error(s2.flux(cos_mode(set, 2)), set, 2, 30.0 / 17.0) < 1e-10);
  }

  SECTION("weighted combination pinned value 154/17 at mode 2") {
    const PhysicalParams p = params_mut();
    const WeightedOnePhaseSolver solver(set, p, 65);
    const double lambda = annulus_eigenvalue(Model::MuT, 2, 1.0, 2.0, p);
    REQUIRE(lambda == Catch::Approx(154.0 / 17.0).margin(1e-13));
    REQUIRE(mode_error(solver.flux(cos_mode(set, 2)), set, 2, 154.0 / 17.0) < 1e-9);
  }

  SECTION("weighted combination, modes 1..8 at fine resolution") {
    const InterfaceSet fine = annulus(1.0, 2.0, 257);
    const PhysicalParams p = params_mut();
    const WeightedOnePhaseSolver solver(fine, p, 257);
    for (int m = 1; m <= 8; ++m) {
      const double lambda = annulus_eigenvalue(Model::MuT, m, 1.0, 2.0, p);
      REQUIRE(mode_error(solver.flux(cos_mode(fine, m)), fine, m, lambda) < 1e-6);
    }
  }

  SECTION("constant datum produces no flux in either map") {
    BoundaryField h = set.zero_field();
    h.values.setConstant(-1.2);
    REQUIRE(InteriorDirichletSolver(set, 1.0).flux(h).values.cwiseAbs().maxCoeff() < 1e-11);
    REQUIRE(ExteriorDirichletSolver(set, 1.0, 65).flux(h).values.cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("flux maps converge spectrally under node refinement") {
  // Compare mode-5 eigenvalue errors at N = 64 and N = 128; the quadrature
  // is spectrally accurate so halving h must beat a factor of 10 unless the
  // coarse error is already at the floor.
  const PhysicalParams p = params_mu(2.0, 0.5);
  auto err_at = [&](int n) {
    const InterfaceSet set = annulus(1.0, 2.0, n);
    const TwoPhaseJumpSolver solver(set, p, n);
    const double lambda = annulus_eigenvalue(Model::Mu, 5, 1.0, 2.0, p);
    return mode_error(solver.flux(cos_mode(set, 5)), set, 5, lambda);
  };
  const double e64 = err_at(65);
  const double e128 = err_at(129);
  REQUIRE((e128 < e64 / 10.0 || e128 < 1e-12));

  const PhysicalParams pm = params_mut();
  auto err_mut = [&](int n) {
    const InterfaceSet set = annulus(1.0, 2.0, n);
    const WeightedOnePhaseSolver solver(set, pm, n);
    const double lambda = annulus_eigenvalue(Model::MuT, 5, 1.0, 2.0, pm);
    return mode_error(solver.flux(cos_mode(set, 5)), set, 5, lambda);
  };
  const double m64 = err_mut(65);
  const double m128 = err_mut(129);
  REQUIRE((m128 < m64 / 10.0 || m128 < 1e-12));
}

TEST_CASE("flux maps are equivariant under rotation of the geometry") {
  // Rotate an off-center geometry by a whole number of grid steps; node j
  // of the rotated circle is then exactly the rotation of node j - shift of
  // the base circle, so fields correspond under an index shift.
  const int n = 49, shift = 7;
  const double alpha = shift * kTwoPi / n;
  const Cplx rot = std::polar(1.0, alpha);

  auto make = [&](bool rotated) {
    InterfaceSet set;
    Cplx c0(0.5, 0.1);
    if (rotated) c0 *= rot;
    set.components.push_back(InterfaceCurve::circle({c0.real(), c0.imag()}, 0.6, n));
    set.wall_radius = 2.5;
    return set;
  };
  const InterfaceSet base = make(false);
  const InterfaceSet turned = make(true);

  BoundaryField hb = base.zero_field();
  for (int i = 0; i < n; ++i)
    hb.values[i] = std::cos(3.0 * base.components[0].parameter(i)) +
                   0.4 * std::sin(base.components[0].parameter(i));
  BoundaryField ht = turned.zero_field();
  for (int i = 0; i < n; ++i) ht.values[i] = hb.values[((i - shift) % n + n) % n];

  const PhysicalParams p = params_mu(1.5, 0.7);
  const VecD fb = TwoPhaseJumpSolver(base, p, 97).flux(hb).values;
  const VecD ft = TwoPhaseJumpSolver(turned, p, 97).flux(ht).values;
  for (int i = 0; i < n; ++i)
    REQUIRE(std::abs(ft[i] - fb[((i - shift) % n + n) % n]) < 1e-9);

  const PhysicalParams pm = params_mut();
  const VecD gb = WeightedOnePhaseSolver(base, pm, 97).flux(hb).values;
  const VecD gt = WeightedOnePhaseSolver(turned, pm, 97).flux(ht).values;
  for (int i = 0; i < n; ++i)
    REQUIRE(std::abs(gt[i] - gb[((i - shift) % n + n) % n]) < 1e-9);
}

TEST_CASE("two-phase flux is symmetric and positive in the arclength inner product") {
  InterfaceSet set;
  std::map<int, Cplx> modes;
  modes[3] = Cplx(0.05, 0.0);
  set.components.push_back(make_perturbed_circle({-0.9, 0.0}, 0.45, modes, 49));
  set.components.push_back(InterfaceCurve::circle({0.9, 0.2}, 0.5, 49));
  set.wall_radius = 2.4;

  const PhysicalParams p = params_mu(1.3, 0.8);
  const TwoPhaseJumpSolver solver(set, p, 97);
  const SetWork works = SetWork::build(set);
  const VecD w = works.weight_field(set).values;

  std::mt19937_64 rng(20260821);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Band-limited random fields: the continuum operator is self-adjoint and
  // the discretization resolves low modes to near machine precision.
  auto random_field = [&]() {
    BoundaryField f = set.zero_field();
    for (std::size_t j = 0; j < set.components.size(); ++j) {
      auto seg = f.segment(static_cast<int>(j));
      const int nj = static_cast<int>(seg.size());
      for (int m = 0; m <= 8; ++m) {
        const double a = gauss(rng), b = gauss(rng);
        for (int i = 0; i < nj; ++i)
          seg[i] += a * std::cos(m * kTwoPi * i / nj) + b * std::sin(m * kTwoPi * i / nj);
      }
    }
    return f;
  };
  for (int trial = 0; trial < 4; ++trial) {
    BoundaryField u = random_field(), v = random_field();
    const VecD gu = solver.flux(u).values;
    const VecD gv = solver.flux(v).values;
    const double a = (v.values.array() * w.array() * gu.array()).sum();
    const double b = (u.values.array() * w.array() * gv.array()).sum();
    const double scale = std::max(std::abs(a), std::abs(b)) + 1e-30;
    REQUIRE(std::abs(a - b) / scale < 1e-6);
    const double quad = (u.values.array() * w.array() * gu.array()).sum();
    REQUIRE(quad > -1e-10 * u.values.squaredNorm());
    // Total flux through the interfaces vanishes (no-flux wall).
    REQUIRE(std::abs((w.array() * gu.array()).sum()) < 1e-8 * gu.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("solvers refuse nearly touching geometry") {
  InterfaceSet set;
  set.components.push_back(InterfaceCurve::circle({-0.52, 0.0}, 0.5, 33));
  set.components.push_back(InterfaceCurve::circle({0.52, 0.0}, 0.5, 33));
  set.wall_radius = 2.0;
  const PhysicalParams p = params_mu();
  REQUIRE_THROWS_AS(TwoPhaseJumpSolver(set, p, 65), ProximityError);

  InterfaceSet near_wall;
  near_wall.components.push_back(InterfaceCurve::circle({0.0, 0.0}, 0.97, 33));
  near_wall.wall_radius = 1.0;
  REQUIRE_THROWS_AS(ExteriorDirichletSolver(near_wall, 1.0, 65), ProximityError);
}

TEST_CASE("field layout mismatches are rejected") {
  const InterfaceSet set = annulus(1.0, 2.0, 33);
  const TwoPhaseJumpSolver solver(set, params_mu(), 65);
  BoundaryField wrong = BoundaryField::zeros({49});
  REQUIRE_THROWS_AS(solver.flux(wrong), SolverError);
}

TEST_CASE("two-phase potential mean responds to the normalization identity") {
  // For the concentric mode-m datum the potential is mean free by symmetry;
  // for the constant datum the potential is piecewise constant with values
  // fixed by the jump, giving mean -h * |inner| / |disk| with the gauge
  // p_ext = 0... the gauge is not pinned, so check mean consistency instead:
  // shifting h by a constant shifts only the inner phase.
  const InterfaceSet set = annulus(1.0, 2.0, 65);
  const TwoPhaseJumpSolver solver(set, params_mu(), 65);
  const auto d2 = solver.solve(cos_mode(set, 2));

  BoundaryField h = cos_mode(set, 2);
  h.values.array() += 1.0;
  const auto d2c = solver.solve(h);
  // Adding the constant c to h changes p by -c inside (area pi) with the
  // wall gauge unchanged, so the mean drops by c * pi / (4 pi) = c / 4.
  REQUIRE(d2c.mean_value - d2.mean_value == Catch::Approx(-0.25).margin(1e-8));
}

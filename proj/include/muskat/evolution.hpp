#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "muskat/operators.hpp"

namespace muskat {

// Explicit time integration of the interface motion V = sigma * G * H with
// conservation and perimeter diagnostics, equilibrium detection, and
// geometric singularity monitors.  Nodes move along current normals under a
// classical four-stage Runge-Kutta scheme; after each accepted step the
// nodes are redistributed to uniform arclength (the law constrains only the
// normal motion) and the curve coefficients are dealiased with the 2/3 rule
// (curvature products alias at high modes and would otherwise break the
// perimeter's monotone decay).

struct SimConfig {
  PhysicalParams params;
  InterfaceSet initial;
  double dt_safety = 0.25;       ///< fraction of the stable step
  double t_end = 1.0;
  double equilibrium_tol = 1e-8; ///< on |V|_inf * R_char / (sigma * max k)
  double ball_tol_rel = 1e-3;    ///< ball-radius floor relative to R_char
  double curvature_cap = 1e3;    ///< on max|H| * R_char
  double tail_cap = 0.1;         ///< spectral-tail energy fraction, pre-filter
  int output_every = 10;         ///< cadence in accepted steps
  int max_steps = 20'000'000;
  int wall_nodes = 0;            ///< 0 = automatic odd choice

  void validate() const {
    params.validate();
    muskat::validate(initial);
    require_disjoint_interiors(initial);
    for (const auto& comp : initial.components)
      if (comp.size() % 2 == 0)
        throw ConfigError("node counts must be odd (flux solver grids)");
    if (!(dt_safety > 0.0) || dt_safety > 1.0)
      throw ConfigError("dt_safety must lie in (0, 1]");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive");
    if (!(equilibrium_tol > 0.0)) throw ConfigError("equilibrium_tol must be positive");
    if (!(ball_tol_rel > 0.0)) throw ConfigError("ball_tol_rel must be positive");
    if (!(curvature_cap > 0.0)) throw ConfigError("curvature_cap must be positive");
    if (!(tail_cap > 0.0)) throw ConfigError("tail_cap must be positive");
    if (output_every < 1) throw ConfigError("output_every must be at least 1");
    if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  }
};

struct DiagnosticsRecord {
  double t = 0.0;
  std::vector<double> areas;   ///< per component
  double area_total = 0.0;
  double perimeter = 0.0;
  double max_h_dev = 0.0;      ///< max nodal |H - mean H| over components
  double ball_r = 0.0;         ///< uniform tangent-ball radius
  double vinf = 0.0;           ///< max |normal velocity|
  double jinf = 0.0;           ///< max per-component |integral of V ds|
  double fit_residual = 0.0;   ///< worst circle-fit residual
};

enum class Termination {
  ReachedTEnd,
  Equilibrium,
  SingularityBall,
  SingularityCurvature,
  ProximityGuard,
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTEnd: return "reached_t_end";
    case Termination::Equilibrium: return "equilibrium";
    case Termination::SingularityBall: return "singularity_ball";
    case Termination::SingularityCurvature: return "singularity_curvature";
    default: return "proximity_guard";
  }
}

struct Trajectory {
  std::vector<std::pair<double, InterfaceSet>> snapshots;
  std::vector<DiagnosticsRecord> diagnostics;
  Termination termination = Termination::ReachedTEnd;
  InterfaceSet final_state;
  double final_time = 0.0;
  int steps_taken = 0;
  double lyapunov_worst_slack = 0.0;  ///< max positive perimeter increment
  std::vector<Circle> final_circles;  ///< fitted at termination
  double perimeter_rate = 0.0;        ///< exponential rate of perimeter excess
  double perimeter_rate_r2 = 0.0;
};

/// Least-squares exponential-rate fit: slope of log(amplitude) against t
/// over the largest suffix whose linear fit reaches R^2 >= 0.999.  Positive
/// result = decay.
struct RateFit {
  double rate = 0.0;
  double r_squared = 0.0;
  int samples_used = 0;
};

inline RateFit decay_rate_fit(const std::vector<std::pair<double, double>>& series) {
  const int n = static_cast<int>(series.size());
  if (n < 10) throw ConfigError("rate fit needs at least 10 samples");
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    if (!(series[i].second > 0.0)) throw ConfigError("rate fit needs positive amplitudes");
    xs[i] = series[i].first;
    ys[i] = std::log(series[i].second);
  }
  const auto fit_from = [&](int start) {
    const int m = n - start;
    double mx = 0.0, my = 0.0;
    for (int i = start; i < n; ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = start; i < n; ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    RateFit out;
    out.samples_used = m;
    if (sxx == 0.0) throw ConfigError("rate fit needs distinct sample times");
    const double slope = sxy / sxx;
    out.rate = -slope;
    if (syy <= 1e-28 * static_cast<double>(m)) {
      out.r_squared = 1.0;  // constant series: the zero-slope fit is exact
      out.rate = 0.0;
      return out;
    }
    double ss_res = 0.0;
    for (int i = start; i < n; ++i) {
      const double pred = my + slope * (xs[i] - mx);
      ss_res += (ys[i] - pred) * (ys[i] - pred);
    }
    out.r_squared = 1.0 - ss_res / syy;
    return out;
  };
  for (int start = 0; start + 10 <= n; ++start) {
    const RateFit f = fit_from(start);
    if (f.r_squared >= 0.999) return f;
  }
  return fit_from(0);  // no suffix qualifies: report the full fit and its quality
}

namespace detail {

struct VelocityEval {
  BoundaryField v;              ///< normal velocity per node
  std::vector<VecC> motion;     ///< complex nodal velocity V * normal
  double vinf = 0.0;
  double jinf = 0.0;
};

inline VelocityEval evaluate_velocity(const InterfaceSet& set, const PhysicalParams& params,
                                      int wall_nodes) {
  const FluxOperator op(set, params, wall_nodes);
  VelocityEval out;
  out.v = op.normal_velocity();
  const PhaseFlux pf = phase_flux(op, out.v);
  for (double f : pf.per_component) out.jinf = std::max(out.jinf, std::abs(f));
  out.vinf = out.v.values.size() ? out.v.values.cwiseAbs().maxCoeff() : 0.0;
  out.motion.reserve(set.components.size());
  for (std::size_t j = 0; j < set.components.size(); ++j) {
    const CurveWork& w = op.works().curves[j];
    const auto seg = out.v.segment(static_cast<int>(j));
    VecC m(w.size());
    for (int i = 0; i < w.size(); ++i) m[i] = seg[i] * w.normal[i];
    out.motion.push_back(std::move(m));
  }
  return out;
}

inline InterfaceSet advance(const InterfaceSet& base, const std::vector<VecC>& motion,
                            double dt) {
  InterfaceSet out;
  out.wall_radius = base.wall_radius;
  out.wall_center = base.wall_center;
  out.components.reserve(base.components.size());
  for (std::size_t j = 0; j < base.components.size(); ++j)
    out.components.push_back(InterfaceCurve(base.components[j].samples() + dt * motion[j]));
  return out;
}

struct StepInfo {
  InterfaceSet state;
  double tail_fraction = 0.0;  ///< worst pre-filter spectral-tail share
};

/// RK4 node motion reusing an already computed first-stage velocity,
/// followed by uniform-arclength redistribution and dealiasing.
inline StepInfo rk4_core(const InterfaceSet& set, const PhysicalParams& params, double dt,
                         const VelocityEval& stage1, int wall_nodes) {
  const VelocityEval k2 = evaluate_velocity(advance(set, stage1.motion, 0.5 * dt), params,
                                            wall_nodes);
  const VelocityEval k3 = evaluate_velocity(advance(set, k2.motion, 0.5 * dt), params,
                                            wall_nodes);
  const VelocityEval k4 = evaluate_velocity(advance(set, k3.motion, dt), params, wall_nodes);

  std::vector<VecC> combined(set.components.size());
  for (std::size_t j = 0; j < set.components.size(); ++j)
    combined[j] = (stage1.motion[j] + 2.0 * k2.motion[j] + 2.0 * k3.motion[j] +
                   k4.motion[j]) /
                  6.0;

  StepInfo out;
  out.state.wall_radius = set.wall_radius;
  out.state.wall_center = set.wall_center;
  for (std::size_t j = 0; j < set.components.size(); ++j) {
    const VecC raw = set.components[j].samples() + dt * combined[j];
    // Energy share beyond the 2/3 band before filtering: an aliasing gauge.
    const VecC coeff = fft(raw);
    const int n = static_cast<int>(raw.size());
    double tail = 0.0, total = 0.0;
    for (int k = 1; k < n; ++k) {
      const double e = std::norm(coeff[k]);
      total += e;
      if (std::abs(fft_freq(k, n)) > n / 3) tail += e;
    }
    if (total > 0.0) out.tail_fraction = std::max(out.tail_fraction, tail / total);
    out.state.components.push_back(
        dealias_curve(resample_uniform_arclength(InterfaceCurve(raw))));
  }
  return out;
}

}  // namespace detail

/// Stable explicit step for the third-order law: a cube of the smallest
/// node spacing over the mobility scale.  The mobility enters through the
/// model's flux strength (see PhysicalParams::effective_mobility); combined
/// with the 2/3 filter this keeps every retained mode inside the RK4
/// stability region.
inline double dt_max(const InterfaceSet& set, const PhysicalParams& params,
                     double dt_safety) {
  double ds_min = std::numeric_limits<double>::infinity();
  for (const auto& comp : set.components) {
    const CurveWork w = CurveWork::build(comp);
    ds_min = std::min(ds_min, w.weights.minCoeff());
  }
  return dt_safety * ds_min * ds_min * ds_min / (params.sigma * params.effective_mobility());
}

/// One explicit step of the node motion (normal velocities from the flux
/// operator), then tangential redistribution and dealiasing.
inline InterfaceSet step(const InterfaceSet& set, const PhysicalParams& params, double dt,
                         double dt_safety = 1.0, int wall_nodes = 0) {
  if (!(dt > 0.0)) throw CflError("step size must be positive");
  if (dt > dt_max(set, params, dt_safety) * (1.0 + 1e-12))
    throw CflError("step size exceeds the stable cubic limit");
  const detail::VelocityEval k1 = detail::evaluate_velocity(set, params, wall_nodes);
  return detail::rk4_core(set, params, dt, k1, wall_nodes).state;
}

inline Trajectory run(const SimConfig& config) {
  config.validate();
  const PhysicalParams& params = config.params;

  InterfaceSet set = config.initial;
  const int m = static_cast<int>(set.components.size());
  const double area0_total = [&] {
    double a = 0.0;
    for (double v : enclosed_areas(set)) a += v;
    return a;
  }();
  const double r_char = std::sqrt(area0_total / (M_PI * m));
  const double p0 = total_perimeter(set);
  const double k_max = std::max(params.k1, params.k2);

  Trajectory traj;
  double t = 0.0;
  double last_perimeter = p0;
  std::vector<std::pair<double, double>> perimeter_series;

  const auto record = [&](const detail::VelocityEval& vel) {
    DiagnosticsRecord rec;
    rec.t = t;
    rec.areas = enclosed_areas(set);
    for (double a : rec.areas) rec.area_total += a;
    rec.perimeter = total_perimeter(set);
    for (const auto& comp : set.components) {
      const CurveWork w = CurveWork::build(comp);
      const double mean_h = (w.curvature.cwiseProduct(w.weights)).sum() / w.weights.sum();
      rec.max_h_dev =
          std::max(rec.max_h_dev, (w.curvature.array() - mean_h).abs().maxCoeff());
    }
    rec.ball_r = ball_condition_radius(set);
    rec.vinf = vel.vinf;
    rec.jinf = vel.jinf;
    rec.fit_residual = fit_circles(set).max_residual;
    traj.diagnostics.push_back(std::move(rec));
    traj.snapshots.emplace_back(t, set);
    perimeter_series.emplace_back(t, traj.diagnostics.back().perimeter);
  };

  // Returns the cause if a monitor fires on the current state.
  const auto monitor = [&](const detail::VelocityEval& vel) -> std::optional<Termination> {
    if (ball_condition_radius(set) < config.ball_tol_rel * r_char)
      return Termination::SingularityBall;
    for (int j = 0; j < m; ++j) {
      const double area = enclosed_area(set.components[j]);
      const double spacing =
          perimeter(set.components[j]) / set.components[j].size();
      // A component shrinking toward the grid scale cannot be continued.
      if (std::sqrt(std::max(area, 0.0) / M_PI) < 5.0 * spacing)
        return Termination::SingularityBall;
    }
    for (const auto& comp : set.components) {
      const CurveWork w = CurveWork::build(comp);
      if (w.curvature.cwiseAbs().maxCoeff() * r_char > config.curvature_cap)
        return Termination::SingularityCurvature;
    }
    const double vdim = vel.vinf * r_char / (params.sigma * k_max);
    if (vdim <= config.equilibrium_tol) return Termination::Equilibrium;
    return std::nullopt;
  };

  int since_output = 0;
  while (true) {
    detail::VelocityEval vel;
    try {
      vel = detail::evaluate_velocity(set, params, config.wall_nodes);
    } catch (const ProximityError&) {
      traj.termination = Termination::ProximityGuard;
      break;
    }

    if (since_output == 0) record(vel);

    if (const auto cause = monitor(vel)) {
      if (since_output != 0) record(vel);
      traj.termination = *cause;
      break;
    }
    if (t >= config.t_end || traj.steps_taken >= config.max_steps) {
      if (since_output != 0) record(vel);
      traj.termination = Termination::ReachedTEnd;
      break;
    }

    const double dt = std::min(dt_max(set, params, config.dt_safety), config.t_end - t);
    detail::StepInfo info;
    try {
      info = detail::rk4_core(set, params, dt, vel, config.wall_nodes);
    } catch (const ProximityError&) {
      if (since_output != 0) record(vel);
      traj.termination = Termination::ProximityGuard;
      break;
    }
    if (info.tail_fraction > config.tail_cap) {
      if (since_output != 0) record(vel);
      traj.termination = Termination::SingularityCurvature;
      break;
    }

    set = std::move(info.state);
    t += dt;
    ++traj.steps_taken;
    since_output = (since_output + 1) % config.output_every;

    const double p = total_perimeter(set);
    traj.lyapunov_worst_slack = std::max(traj.lyapunov_worst_slack, p - last_perimeter);
    last_perimeter = p;
  }

  traj.final_state = set;
  traj.final_time = t;

  const CircleFit fit = fit_circles(set);
  traj.final_circles = fit.circles;
  if (traj.termination == Termination::Equilibrium) {
    double p_inf = 0.0;
    for (const auto& c : traj.final_circles) p_inf += 2.0 * M_PI * c.radius;
    std::vector<std::pair<double, double>> excess;
    for (const auto& [time, p] : perimeter_series)
      if (p - p_inf > 1e-12 * p0) excess.emplace_back(time, p - p_inf);
    if (excess.size() >= 10) {
      const RateFit rf = decay_rate_fit(excess);
      traj.perimeter_rate = rf.rate;
      traj.perimeter_rate_r2 = rf.r_squared;
    }
  }
  return traj;
}

}  // namespace muskat

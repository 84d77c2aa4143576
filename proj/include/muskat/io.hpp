#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "muskat/evolution.hpp"
#include "muskat/stability.hpp"

namespace muskat::io {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

/// One curve as CSV rows `theta,x,y` with theta the uniform parameter.
inline std::string curve_csv(const InterfaceCurve& curve) {
  std::string out = "theta,x,y\n";
  for (int j = 0; j < curve.size(); ++j) {
    out += format_double(curve.parameter(j));
    out += ',';
    out += format_double(curve.samples()[j].real());
    out += ',';
    out += format_double(curve.samples()[j].imag());
    out += '\n';
  }
  return out;
}

/// Interface set as JSON: wall record plus per-component spectral
/// coefficient arrays (pairs [re, im] in transform index order; node
/// samples are recovered by the inverse transform).
inline ordered_json set_to_json(const InterfaceSet& set) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["wall"] = {{"radius", set.wall_radius},
               {"center", {set.wall_center.x(), set.wall_center.y()}}};
  ordered_json comps = ordered_json::array();
  for (const auto& comp : set.components) {
    const VecC coeff = interpolation_coefficients(comp.samples());
    ordered_json arr = ordered_json::array();
    for (int k = 0; k < coeff.size(); ++k)
      arr.push_back({coeff[k].real(), coeff[k].imag()});
    comps.push_back({{"nodes", comp.size()}, {"coefficients", std::move(arr)}});
  }
  j["components"] = std::move(comps);
  return j;
}

inline InterfaceSet set_from_json(const ordered_json& j) {
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kSchemaVersion)
    throw ConfigError("unsupported geometry schema version");
  InterfaceSet set;
  set.wall_radius = j.at("wall").at("radius").get<double>();
  const auto& c = j.at("wall").at("center");
  set.wall_center = Vec2(c.at(0).get<double>(), c.at(1).get<double>());
  for (const auto& comp : j.at("components")) {
    const int n = comp.at("nodes").get<int>();
    const auto& arr = comp.at("coefficients");
    if (static_cast<int>(arr.size()) != n)
      throw ConfigError("component coefficient count does not match nodes");
    VecC coeff(n);
    for (int k = 0; k < n; ++k)
      coeff[k] = Cplx(arr.at(k).at(0).get<double>(), arr.at(k).at(1).get<double>());
    VecC z = ifft(coeff) * static_cast<double>(n);
    set.components.push_back(InterfaceCurve(std::move(z)));
  }
  return set;
}

/// Diagnostics CSV with the stable header
/// t,area_total,area_1..area_m,perimeter,maxHdev,ball_r,vinf,jinf,fit_residual.
inline std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records,
                                   int n_components) {
  std::string out = "t,area_total";
  for (int j = 1; j <= n_components; ++j) out += ",area_" + std::to_string(j);
  out += ",perimeter,maxHdev,ball_r,vinf,jinf,fit_residual\n";
  for (const auto& r : records) {
    out += format_double(r.t);
    out += ',';
    out += format_double(r.area_total);
    for (double a : r.areas) {
      out += ',';
      out += format_double(a);
    }
    out += ',';
    out += format_double(r.perimeter);
    out += ',';
    out += format_double(r.max_h_dev);
    out += ',';
    out += format_double(r.ball_r);
    out += ',';
    out += format_double(r.vinf);
    out += ',';
    out += format_double(r.jinf);
    out += ',';
    out += format_double(r.fit_residual);
    out += '\n';
  }
  return out;
}

inline ordered_json termination_json(const Trajectory& traj) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["termination"] = to_string(traj.termination);
  j["final_time"] = traj.final_time;
  j["steps_taken"] = traj.steps_taken;
  j["lyapunov_worst_slack"] = traj.lyapunov_worst_slack;
  ordered_json circles = ordered_json::array();
  for (const auto& c : traj.final_circles)
    circles.push_back(
        {{"center", {c.center.x(), c.center.y()}}, {"radius", c.radius}});
  j["fitted_circles"] = std::move(circles);
  j["perimeter_rate"] = traj.perimeter_rate;
  j["perimeter_rate_r2"] = traj.perimeter_rate_r2;
  return j;
}

inline ordered_json spectrum_to_json(const SpectrumReport& rep) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  ordered_json evs = ordered_json::array();
  for (const auto& z : rep.eigenvalues) evs.push_back({z.real(), z.imag()});
  j["eigenvalues"] = std::move(evs);  // of the negated linearization, by real part
  j["kernel_count"] = rep.kernel_count;
  j["unstable_count"] = rep.unstable_count;
  j["stable_count"] = rep.stable_count;
  j["max_imag"] = rep.max_imag;
  j["spectral_radius"] = rep.spectral_radius;
  j["threshold"] = rep.threshold;
  j["semi_simple"] = rep.semi_simple;
  j["classification"] = to_string(rep.classification);
  return j;
}

/// Dense matrix entries as plain CSV (one row per line, no header).
inline std::string matrix_csv(const OperatorMatrix& op) {
  std::string out;
  for (Eigen::Index i = 0; i < op.matrix.rows(); ++i) {
    for (Eigen::Index k = 0; k < op.matrix.cols(); ++k) {
      if (k) out += ',';
      out += format_double(op.matrix(i, k));
    }
    out += '\n';
  }
  return out;
}

/// Sidecar carrying everything needed to interpret the matrix CSV.
inline ordered_json matrix_sidecar(const OperatorMatrix& op) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["size"] = op.matrix.rows();
  j["geometry_tag"] = op.geometry_tag;
  j["offsets"] = op.offsets;
  ordered_json w = ordered_json::array();
  for (Eigen::Index i = 0; i < op.weights.size(); ++i) w.push_back(op.weights[i]);
  j["weights"] = std::move(w);
  return j;
}

/// Stable serialization used for every JSON artifact: two-space indent and
/// a trailing newline, with doubles encoded at round-trip precision by the
/// library.
inline std::string to_text(const ordered_json& j) { return j.dump(2) + "\n"; }

inline std::string snapshot_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%04d.json", index);
  return buf;
}

inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj) {
  const int m = traj.final_state.components.empty()
                    ? 0
                    : static_cast<int>(traj.final_state.components.size());
  write_file(dir / "diagnostics.csv", diagnostics_csv(traj.diagnostics, m));
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    ordered_json snap = set_to_json(traj.snapshots[i].second);
    snap["t"] = traj.snapshots[i].first;
    write_file(dir / snapshot_name(static_cast<int>(i)), to_text(snap));
  }
  write_file(dir / "termination.json", to_text(termination_json(traj)));
}

}  // namespace muskat::io

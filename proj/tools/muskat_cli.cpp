// Command line front end: simulate | spectrum | oracle | verify.
//
// Exit codes: 0 success, 1 hard failure, 2 configuration error.  A malformed
// configuration is rejected before any output file is created.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "muskat/verify.hpp"

namespace fs = std::filesystem;
using namespace muskat;

namespace {

int cmd_simulate(const std::string& config_path, const std::string& out_override) {
  const io::ExperimentConfig config =
      io::ExperimentConfig::from_text(io::read_file(config_path));
  const SimConfig sim = config.sim_config();  // full validation, before any output
  const fs::path out = out_override.empty() ? fs::path(config.out_dir) : fs::path(out_override);

  const Trajectory traj = run(sim);
  io::write_trajectory(out, traj);

  std::cout << "termination " << to_string(traj.termination) << " at t = "
            << io::format_double(traj.final_time) << " after " << traj.steps_taken
            << " steps; " << traj.snapshots.size() << " snapshots -> " << out.string()
            << "\n";
  return 0;
}

int cmd_spectrum(const std::string& config_path, const std::string& out_override,
                 bool export_matrix) {
  const io::ExperimentConfig config =
      io::ExperimentConfig::from_text(io::read_file(config_path));
  const EquilibriumConfig eq = config.equilibrium_config();
  const PhysicalParams params = config.physical_params();
  const fs::path out = out_override.empty() ? fs::path(config.out_dir) : fs::path(out_override);

  const OperatorMatrix L = assemble_linearization(eq, params, config.spectrum_nodes);
  const SpectrumReport rep = spectrum(L, eq);
  io::write_file(out / "spectrum.json", io::to_text(io::spectrum_to_json(rep)));

  if (export_matrix) {
    const OperatorMatrix G = assemble_matrix(
        FluxOperator(eq.interface_set(config.spectrum_nodes), params));
    io::write_file(out / "operator_matrix.csv", io::matrix_csv(G));
    io::write_file(out / "operator_matrix.json", io::to_text(io::matrix_sidecar(G)));
  }

  std::cout << "classification " << to_string(rep.classification) << ": kernel "
            << rep.kernel_count << ", unstable " << rep.unstable_count << ", stable "
            << rep.stable_count << " -> " << (out / "spectrum.json").string() << "\n";
  return 0;
}

int cmd_oracle(const std::string& model_name, double radius, double wall_radius,
               double k1, double k2, double rho1, double rho2, int m_max,
               const std::string& out_dir) {
  PhysicalParams params;
  if (model_name == "mu") {
    params.model = Model::Mu;
  } else if (model_name == "mut") {
    params.model = Model::MuT;
  } else {
    throw ConfigError("--model must be mu or mut");
  }
  params.k1 = k1;
  params.k2 = k2;
  params.rho1 = rho1;
  params.rho2 = rho2;
  params.validate();
  if (m_max < 0) throw ConfigError("--m-max must be nonnegative");

  std::string table = "m,eigenvalue\n";
  for (int m = 0; m <= m_max; ++m)
    table += std::to_string(m) + "," +
             io::format_double(
                 annulus_eigenvalue(params.model, m, radius, wall_radius, params)) +
             "\n";

  std::cout << table;
  if (!out_dir.empty()) {
    io::write_file(fs::path(out_dir) / "oracle.csv", table);
    std::cout << "-> " << (fs::path(out_dir) / "oracle.csv").string() << "\n";
  }
  return 0;
}

int cmd_verify(const std::string& level_name, const std::string& out_dir, unsigned seed) {
  const auto level =
      level_name == "full" ? verify::Level::Full : verify::Level::Fast;
  const auto t0 = std::chrono::steady_clock::now();
  const verify::VerifyReport report =
      verify::run_verification(level, seed, out_dir, &std::cout);
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
  int passed = 0;
  for (const auto& c : report.criteria) passed += c.pass ? 1 : 0;
  std::cout << passed << "/" << report.criteria.size() << " criteria passed ("
            << verify::to_string(level) << " level) in " << elapsed / 1000.0
            << " s; report -> " << (fs::path(out_dir) / "verify_report.json").string()
            << "\n";
  return report.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar two-phase interface-flow laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;

  auto* sim = app.add_subcommand("simulate", "Evolve interfaces and write artifacts");
  sim->add_option("config", config_path, "configuration file")->required();
  sim->add_option("--out", out_dir, "output directory (default: out_dir from the config)");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "Linearize about circles and report the spectrum");
  spectrum_cmd->add_option("config", config_path, "configuration file")->required();
  spectrum_cmd->add_option("--out", out_dir, "output directory (default: out_dir from the config)");
  bool export_matrix = false;
  spectrum_cmd->add_flag("--export-matrix", export_matrix, "also write the flux-map matrix and sidecar");

  auto* oracle = app.add_subcommand("oracle", "Closed-form annulus eigenvalue table");
  std::string model_name = "mu";
  double radius = 1.0, wall_radius = 2.0, k1 = 1.0, k2 = 1.0, rho1 = 1.0, rho2 = 2.0;
  int m_max = 8;
  oracle->add_option("--model", model_name, "mu or mut")->capture_default_str();
  oracle->add_option("--radius", radius, "interface radius")->capture_default_str();
  oracle->add_option("--wall-radius", wall_radius, "wall radius")->capture_default_str();
  oracle->add_option("--k1", k1, "inner mobility")->capture_default_str();
  oracle->add_option("--k2", k2, "outer mobility")->capture_default_str();
  oracle->add_option("--rho1", rho1, "inner density")->capture_default_str();
  oracle->add_option("--rho2", rho2, "outer density")->capture_default_str();
  oracle->add_option("--m-max", m_max, "largest mode")->capture_default_str();
  oracle->add_option("--out", out_dir, "also write oracle.csv into this directory");

  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance criteria");
  std::string level_name = "fast";
  unsigned seed = 20260821u;
  verify_cmd->add_option("--level", level_name, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}))
      ->capture_default_str();
  verify_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  verify_cmd->add_option("--seed", seed, "seed for randomized geometries")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help or the error message
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir);
    if (spectrum_cmd->parsed()) return cmd_spectrum(config_path, out_dir, export_matrix);
    if (oracle->parsed())
      return cmd_oracle(model_name, radius, wall_radius, k1, k2, rho1, rho2, m_max,
                        out_dir);
    if (verify_cmd->parsed())
      return cmd_verify(level_name, out_dir.empty() ? "verify_out" : out_dir, seed);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidGeometryError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

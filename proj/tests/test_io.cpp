#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "muskat/config.hpp"
#include "muskat/io.hpp"

using namespace muskat;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("muskat_io_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

int count_fields(const std::string& line) {
  int n = 1;
  for (char c : line)
    if (c == ',') ++n;
  return n;
}

}  // namespace

TEST_CASE("number formatting round-trips", "[io]") {
  const double values[] = {0.0,    1.0,        49.0,   -3.5,       0.1,
                           1e-8,   2.8125,     1e300,  -2.2e-308,  3.141592653589793,
                           1.0 / 3.0, 6.02214076e23};
  for (double v : values) {
    const std::string s = io::format_double(v);
    REQUIRE(std::strtod(s.c_str(), nullptr) == v);
  }
  REQUIRE(io::format_double(49.0) == "49");
  REQUIRE(io::format_double(0.25) == "0.25");
}

TEST_CASE("curve CSV has the documented shape", "[io]") {
  const auto curve = InterfaceCurve::circle(Vec2(0.5, -0.25), 1.0, 17);
  const auto lines = split_lines(io::curve_csv(curve));
  REQUIRE(lines.size() == 18);
  REQUIRE(lines[0] == "theta,x,y");
  for (std::size_t i = 1; i < lines.size(); ++i) REQUIRE(count_fields(lines[i]) == 3);
  // First node sits at parameter zero, on the positive-x side of the center.
  REQUIRE(lines[1].substr(0, 2) == "0,");
  const char* rest = lines[1].c_str() + 2;
  char* end = nullptr;
  REQUIRE(std::strtod(rest, &end) == Approx(1.5).epsilon(1e-12));
}

TEST_CASE("interface set JSON round-trips", "[io]") {
  InterfaceSet set;
  set.components.push_back(
      make_perturbed_circle(Vec2(-1.5, 0.2), 1.0, {{2, Cplx(0.05, 0.0)}}, 49));
  set.components.push_back(InterfaceCurve::circle(Vec2(1.4, -0.1), 0.8, 33));
  set.wall_radius = 4.0;
  set.wall_center = Vec2(0.1, -0.2);

  SECTION("direct") {
    const InterfaceSet back = io::set_from_json(io::set_to_json(set));
    REQUIRE(back.components.size() == 2);
    REQUIRE(back.wall_radius == set.wall_radius);
    REQUIRE(back.wall_center.x() == set.wall_center.x());
    REQUIRE(back.wall_center.y() == set.wall_center.y());
    for (std::size_t j = 0; j < set.components.size(); ++j) {
      REQUIRE(back.components[j].size() == set.components[j].size());
      const double err =
          (back.components[j].samples() - set.components[j].samples()).cwiseAbs().maxCoeff();
      REQUIRE(err < 1e-13);
    }
  }

  SECTION("through serialized text") {
    const std::string text = io::to_text(io::set_to_json(set));
    REQUIRE(text.back() == '\n');
    const InterfaceSet back = io::set_from_json(io::ordered_json::parse(text));
    for (std::size_t j = 0; j < set.components.size(); ++j) {
      const double err =
          (back.components[j].samples() - set.components[j].samples()).cwiseAbs().maxCoeff();
      REQUIRE(err < 1e-13);
    }
  }

  SECTION("rejects bad input") {
    io::ordered_json j = io::set_to_json(set);
    j["schema_version"] = 999;
    REQUIRE_THROWS_AS(io::set_from_json(j), ConfigError);

    io::ordered_json k = io::set_to_json(set);
    k["components"][0]["nodes"] = 7;
    REQUIRE_THROWS_AS(io::set_from_json(k), ConfigError);
  }
}

TEST_CASE("diagnostics CSV header is stable", "[io]") {
  DiagnosticsRecord r;
  r.t = 0.5;
  r.areas = {3.0, 1.0};
  r.area_total = 4.0;
  r.perimeter = 12.0;
  r.max_h_dev = 0.01;
  r.ball_r = 0.4;
  r.vinf = 1e-3;
  r.jinf = 2e-3;
  r.fit_residual = 1e-6;
  const auto lines = split_lines(io::diagnostics_csv({r, r}, 2));
  REQUIRE(lines.size() == 3);
  REQUIRE(lines[0] == "t,area_total,area_1,area_2,perimeter,maxHdev,ball_r,vinf,jinf,fit_residual");
  REQUIRE(count_fields(lines[1]) == 10);
  REQUIRE(count_fields(lines[2]) == 10);

  const auto single = split_lines(io::diagnostics_csv({}, 1));
  REQUIRE(single.size() == 1);
  REQUIRE(single[0] == "t,area_total,area_1,perimeter,maxHdev,ball_r,vinf,jinf,fit_residual");
}

TEST_CASE("trajectory artifacts", "[io]") {
  SimConfig config;
  config.params.model = Model::Mu;
  config.initial.components.push_back(
      make_perturbed_circle(Vec2(0, 0), 1.0, {{2, Cplx(1e-3, 0.0)}}, 49));
  config.initial.wall_radius = 2.0;
  config.t_end = 2e-3;
  config.output_every = 2;
  const Trajectory traj = run(config);
  REQUIRE(traj.termination == Termination::ReachedTEnd);
  REQUIRE(traj.snapshots.size() >= 2);

  SECTION("termination record fields") {
    const io::ordered_json j = io::termination_json(traj);
    REQUIRE(j.at("termination").get<std::string>() == "reached_t_end");
    REQUIRE(j.at("final_time").get<double>() == Approx(2e-3));
    REQUIRE(j.at("steps_taken").get<long>() == traj.steps_taken);
    REQUIRE(j.contains("lyapunov_worst_slack"));
    REQUIRE(j.contains("fitted_circles"));
    REQUIRE(j.contains("perimeter_rate"));
    REQUIRE(j.contains("perimeter_rate_r2"));
  }

  SECTION("snapshot names are zero padded") {
    REQUIRE(io::snapshot_name(0) == "snap_0000.json");
    REQUIRE(io::snapshot_name(7) == "snap_0007.json");
    REQUIRE(io::snapshot_name(123) == "snap_0123.json");
  }

  SECTION("write_trajectory emits the documented file set, deterministically") {
    const fs::path dir_a = temp_dir("traj_a");
    const fs::path dir_b = temp_dir("traj_b");
    io::write_trajectory(dir_a, traj);
    io::write_trajectory(dir_b, traj);

    REQUIRE(fs::exists(dir_a / "diagnostics.csv"));
    REQUIRE(fs::exists(dir_a / "termination.json"));
    REQUIRE(fs::exists(dir_a / "snap_0000.json"));
    REQUIRE(fs::exists(dir_a / io::snapshot_name(static_cast<int>(traj.snapshots.size()) - 1)));
    REQUIRE_FALSE(fs::exists(dir_a / io::snapshot_name(static_cast<int>(traj.snapshots.size()))));

    for (const auto& entry : fs::directory_iterator(dir_a)) {
      const auto name = entry.path().filename();
      REQUIRE(io::read_file(dir_a / name) == io::read_file(dir_b / name));
    }

    const auto diag = split_lines(io::read_file(dir_a / "diagnostics.csv"));
    REQUIRE(diag.size() == traj.diagnostics.size() + 1);
    REQUIRE(diag[0] == "t,area_total,area_1,perimeter,maxHdev,ball_r,vinf,jinf,fit_residual");

    const auto snap = io::ordered_json::parse(io::read_file(dir_a / "snap_0000.json"));
    REQUIRE(snap.at("t").get<double>() == Approx(0.0));
    const InterfaceSet first = io::set_from_json(snap);
    REQUIRE(first.components.size() == 1);
    REQUIRE(first.components[0].size() == 49);

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
  }
}

TEST_CASE("spectrum report JSON", "[io]") {
  EquilibriumConfig eq;
  eq.circles.push_back(Circle{Vec2(0, 0), 1.0});
  eq.wall_radius = 2.0;
  eq.model = Model::Mu;
  PhysicalParams params;
  params.model = Model::Mu;
  const SpectrumReport rep = spectrum(assemble_linearization(eq, params, 33), eq);

  const io::ordered_json j = io::spectrum_to_json(rep);
  REQUIRE(j.at("eigenvalues").size() == 33);
  REQUIRE(j.at("kernel_count").get<int>() == 3);
  REQUIRE(j.at("unstable_count").get<int>() == 0);
  REQUIRE(j.at("stable_count").get<int>() == 30);
  REQUIRE(j.at("semi_simple").get<bool>());
  REQUIRE(j.at("classification").get<std::string>() == "normally_stable");
  REQUIRE(j.at("max_imag").get<double>() <= j.at("threshold").get<double>());
  REQUIRE(j.at("spectral_radius").get<double>() > 0.0);
  // Entries are [re, im] pairs sorted by descending real part.
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& ev : j.at("eigenvalues")) {
    REQUIRE(ev.size() == 2);
    const double re = ev.at(0).get<double>();
    REQUIRE(re <= prev + 1e-15);
    prev = re;
  }
}

TEST_CASE("operator matrix CSV and sidecar", "[io]") {
  InterfaceSet set;
  set.components.push_back(InterfaceCurve::circle(Vec2(0, 0), 1.0, 17));
  set.wall_radius = 3.0;
  PhysicalParams params;
  params.model = Model::Mu;
  FluxOperator op(set, params);
  const OperatorMatrix mat = assemble_matrix(op);

  const auto lines = split_lines(io::matrix_csv(mat));
  REQUIRE(lines.size() == 17);
  for (const auto& line : lines) REQUIRE(count_fields(line) == 17);

  const io::ordered_json j = io::matrix_sidecar(mat);
  REQUIRE(j.at("size").get<int>() == 17);
  REQUIRE(j.at("offsets") == io::ordered_json::array({0, 17}));
  REQUIRE(j.at("weights").size() == 17);
  const std::string tag = j.at("geometry_tag").get<std::string>();
  REQUIRE(tag.substr(0, 7) == "m1-n17-");

  // Tag tracks the geometry: identical input gives the identical tag, any
  // geometric change gives a different one.
  REQUIRE(geometry_tag(set) == tag);
  InterfaceSet other = set;
  other.wall_radius = 2.5;
  REQUIRE(geometry_tag(other) != tag);
}

TEST_CASE("experiment config round-trips canonically", "[config]") {
  SECTION("defaults") {
    const io::ExperimentConfig c;
    const std::string text = c.to_text();
    const io::ExperimentConfig back = io::ExperimentConfig::from_text(text);
    REQUIRE(back.to_text() == text);
  }

  SECTION("fully populated") {
    io::ExperimentConfig c;
    c.model = "mut";
    c.sigma = 2.5;
    c.k1 = 0.5;
    c.k2 = 3.0;
    c.rho1 = 1.0;
    c.rho2 = 2.0;
    c.wall_radius = 6.0;
    c.wall_center = {0.25, -0.125};
    c.centers_x = {-2.0, 2.0};
    c.centers_y = {0.0, 0.0};
    c.radii = {1.0, 1.2};
    c.nodes = {49, 49};
    c.perturb_cos = {0, 2, 0.05, 1, 3, -0.01};
    c.perturb_sin = {1, 2, 0.02};
    c.t_end = 0.8;
    c.output_every = 25;
    c.seed = 7;
    c.out_dir = "artifacts";
    const std::string text = c.to_text();
    const io::ExperimentConfig back = io::ExperimentConfig::from_text(text);
    REQUIRE(back.to_text() == text);
    REQUIRE(back.model == "mut");
    REQUIRE(back.perturb_cos.size() == 6);
    REQUIRE(back.perturb_sin[2] == 0.02);
    REQUIRE(back.out_dir == "artifacts");
  }

  SECTION("comments and blank lines are accepted") {
    io::ExperimentConfig c;
    const std::string text = "# experiment\n\n" + c.to_text() + "\n# trailing\n";
    REQUIRE(io::ExperimentConfig::from_text(text).to_text() == c.to_text());
  }
}

TEST_CASE("config parser rejects malformed input", "[config]") {
  const std::string base = io::ExperimentConfig().to_text();
  const auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      io::ExperimentConfig::from_text(text);
      FAIL("expected ConfigError for: " + needle);
    } catch (const ConfigError& e) {
      INFO("needle '" << needle << "' in message '" << e.what() << "'");
      REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_error(base + "mystery = 1\n", "unknown key 'mystery'");
  expect_error(base + "sigma = 2\n", "duplicate key 'sigma'");
  expect_error("model = \"mu\"\n", "schema_version");
  expect_error(base + "bad line\n", "key = value");
  expect_error("schema_version = 1\nk1 = abc\n", "invalid number");
  expect_error("schema_version = 1\nout_dir = \"unterminated\n", "malformed string");
  expect_error("schema_version = 1\nradii = [1.0,, 2.0]\n", "empty array element");
  expect_error("schema_version = 1\nradii = [1.0\n", "malformed array");

  // Type mismatches against the schema.
  expect_error("schema_version = 1\nmodel = 3\n", "must be a string");
  expect_error("schema_version = 1\nsigma = \"x\"\n", "must be a number");
  expect_error("schema_version = 1\nradii = 1.0\n", "must be an array");
  expect_error("schema_version = 1\noutput_every = 2.5\n", "must be an integer");
  expect_error("schema_version = 2\n", "schema_version");

  // Line numbers point at the offending line.
  try {
    io::ExperimentConfig::from_text("schema_version = 1\nk1 = oops\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("config builds simulation and spectrum inputs", "[config]") {
  io::ExperimentConfig c;
  c.model = "mu";
  c.wall_radius = 3.0;
  c.centers_x = {0.0};
  c.centers_y = {0.0};
  c.radii = {1.0};
  c.nodes = {49};
  c.perturb_cos = {0, 2, 0.05};
  c.perturb_sin = {0, 3, 0.02};

  SECTION("perturbations map to normal-height modes") {
    const SimConfig sim = c.sim_config();
    REQUIRE(sim.initial.components.size() == 1);
    REQUIRE(sim.initial.components[0].size() == 49);
    const auto graph =
        measure_graph(sim.initial.components[0], Circle{Vec2(0, 0), 1.0});
    const auto amps = mode_amplitudes(graph);
    REQUIRE(std::abs(amps.at(2)) == Approx(0.05).epsilon(1e-6));
    REQUIRE(std::abs(amps.at(3)) == Approx(0.02).epsilon(1e-6));
    // Cosine amplitude is real, sine amplitude shows up in the imaginary part.
    REQUIRE(amps.at(2).real() == Approx(0.05).epsilon(1e-6));
    REQUIRE(std::abs(amps.at(3).imag()) == Approx(0.02).epsilon(1e-6));
  }

  SECTION("spectrum input ignores perturbations") {
    const EquilibriumConfig eq = c.equilibrium_config();
    REQUIRE(eq.circles.size() == 1);
    REQUIRE(eq.circles[0].radius == 1.0);
    REQUIRE(eq.model == Model::Mu);
  }

  SECTION("model validation propagates") {
    io::ExperimentConfig bad = c;
    bad.model = "other";
    REQUIRE_THROWS_AS(bad.physical_params(), ConfigError);

    io::ExperimentConfig unequal = c;
    unequal.model = "mut";
    unequal.centers_x = {-2.0, 2.0};
    unequal.centers_y = {0.0, 0.0};
    unequal.radii = {1.0, 1.2};
    unequal.nodes = {49, 49};
    REQUIRE_THROWS_AS(unequal.equilibrium_config(), ModelError);

    io::ExperimentConfig even = c;
    even.nodes = {48};
    REQUIRE_THROWS_AS(even.sim_config(), ConfigError);

    io::ExperimentConfig ragged = c;
    ragged.radii = {1.0, 0.5};
    REQUIRE_THROWS_AS(ragged.sim_config(), ConfigError);
  }
}

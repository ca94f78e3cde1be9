#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gvf3d/scenario.hpp"

using namespace gvf3d;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = fs::path(GVF3D_SOURCE_DIR) / "scenarios";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gvf3d_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ConfigError config_error(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError("", "");
}

constexpr std::string_view kRawHelix = R"(
name = "short"
t_end = 2.0
[path]
builtin = "helix"
[system]
kind = "raw"
initial_state = [2.0, 0.0, 0.0]
[integrator]
dt = 0.01
)";

}  // namespace

TEST(Scenario, LoadsShippedFiles) {
  const Scenario s1 = load_scenario(kScenarios / "scenario1.toml");
  EXPECT_EQ(s1.system, SystemKind::Aircraft);
  EXPECT_EQ(s1.k1, 2.0);
  EXPECT_EQ(s1.t_end, 60.0);
  const auto& b = std::get<BuiltinPathSpec>(s1.path);
  EXPECT_EQ(b.name, "cylinder_intersection");
  EXPECT_EQ(b.b, 1.5);
  ASSERT_EQ(s1.initial_state.size(), 5u);
  EXPECT_DOUBLE_EQ(s1.initial_state[3], std::atan(1.0));

  const Scenario s2 = load_scenario(kScenarios / "scenario2.toml");
  EXPECT_EQ(std::get<BuiltinPathSpec>(s2.path).name, "helix");
  EXPECT_EQ(s2.initial_state[2], -5.0);
}

TEST(Scenario, Defaults) {
  const Scenario s = parse_scenario(kRawHelix);
  EXPECT_EQ(s.k1, 1.0);
  EXPECT_EQ(s.integrator.method, IntegratorMethod::Rk4);
  EXPECT_EQ(s.integrator.dt, 0.01);
  EXPECT_EQ(s.output.prefix, "trajectory");
  EXPECT_EQ(s.disturbance, Disturbance::zero());
}

TEST(Scenario, RoundTripAndHash) {
  for (const char* f : {"scenario1.toml", "scenario2.toml"}) {
    const Scenario s = load_scenario(kScenarios / f);
    const std::string text = to_toml(s);
    EXPECT_EQ(parse_scenario(text), s);
    EXPECT_EQ(to_toml(parse_scenario(text)), text);
    EXPECT_EQ(scenario_hash(s), scenario_hash(load_scenario(kScenarios / f)));
    EXPECT_EQ(scenario_hash(s).size(), 64u);
  }
  Scenario a = parse_scenario(kRawHelix), b = a;
  b.k2 = 1.5;
  EXPECT_NE(scenario_hash(a), scenario_hash(b));
}

TEST(Scenario, RoundTripExpressionAndDisturbance) {
  const Scenario s = parse_scenario(R"(
[path]
phi1 = "x^2 + y^2 - 1"
phi2 = "z - 0.5 * x"
boundedness = "bounded"
[field]
k1 = 0.5
[system]
kind = "perturbed"
initial_state = [1.2, 0.0, 0.0]
[system.disturbance]
kind = "sinusoid"
amplitude = [0.1, 0.0, 0.2]
frequency = [1.0, 2.0, 3.0]
[integrator]
method = "rk45"
rtol = 1e-8
[output]
svg = false
view = "xy"
)");
  EXPECT_EQ(std::get<ExpressionPathSpec>(s.path).boundedness, Boundedness::Bounded);
  EXPECT_EQ(s.disturbance.kind(), Disturbance::Kind::Sinusoid);
  EXPECT_EQ(parse_scenario(to_toml(s)), s);
}

TEST(Scenario, BuiltinAndExpressionConflict) {
  const ConfigError e = config_error(R"(
[path]
builtin = "helix"
phi1 = "x"
phi2 = "y"
[system]
kind = "raw"
initial_state = [0.0, 0.0, 0.0]
)");
  EXPECT_EQ(e.field(), "path");
}

TEST(Scenario, UnknownKeyIsNamed) {
  const ConfigError e = config_error(R"(
[path]
builtin = "helix"
[system]
kind = "aircraft"
initial_state = [0.0, 0.0, 0.0, 0.0, 0.0]
[system.aircraft]
tau_q = 1.0
)");
  EXPECT_EQ(e.field(), "system.aircraft.tau_q");
}

TEST(Scenario, ExpressionErrorCarriesOffset) {
  const ConfigError e = config_error(R"(
[path]
phi1 = "x + foo"
phi2 = "y"
[system]
kind = "raw"
initial_state = [0.0, 0.0, 0.0]
)");
  EXPECT_EQ(e.field(), "path.phi1");
  EXPECT_NE(std::string(e.what()).find("4"), std::string::npos) << e.what();
}

TEST(Scenario, SchemaViolations) {
  EXPECT_EQ(config_error("t_end = -1.0\n[path]\nbuiltin = \"helix\"\n").field(), "t_end");
  EXPECT_EQ(config_error("[path]\nbuiltin = \"helix\"\n[system]\nkind = \"raw\"\ninitial_state = [1.0, 2.0]\n").field(),
            "system.initial_state");
  EXPECT_EQ(config_error("[path]\nbuiltin = \"knot\"\n[system]\nkind = \"raw\"\ninitial_state = [1.0, 2.0, 3.0]\n")
                .field(),
            "path.builtin");
  EXPECT_EQ(config_error("[path]\nbuiltin = \"helix\"\n[field]\nk1 = 0.0\n[system]\nkind = \"raw\"\n"
                         "initial_state = [1.0, 2.0, 3.0]\n")
                .field(),
            "field");
  const ConfigError syntax = config_error("[path\n");
  EXPECT_NE(std::string(syntax.what()).find("line 1"), std::string::npos);
  EXPECT_THROW(load_scenario(kScenarios / "missing.toml"), ConfigError);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code(EventKind::Completed), 0);
  EXPECT_EQ(exit_code(EventKind::SingularApproach), 2);
  EXPECT_EQ(exit_code(EventKind::DomainExit), 3);
  EXPECT_EQ(exit_code(EventKind::StepUnderflow), kExitFailure);
  EXPECT_EQ(kExitConfigError, 4);
}

TEST(Run, WritesArtifactsDeterministically) {
  const Scenario s = parse_scenario(kRawHelix);
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const RunArtifactSet ra = run(s, a);
  const RunArtifactSet rb = run(s, b);
  EXPECT_EQ(ra.exit_code, 0);
  ASSERT_TRUE(fs::exists(ra.csv));
  ASSERT_TRUE(fs::exists(ra.metadata));
  ASSERT_EQ(ra.svgs.size(), 2u);
  EXPECT_EQ(slurp(ra.csv), slurp(rb.csv));
  EXPECT_EQ(slurp(ra.metadata), slurp(rb.metadata));
  for (std::size_t i = 0; i < ra.svgs.size(); ++i) EXPECT_EQ(slurp(ra.svgs[i]), slurp(rb.svgs[i]));

  const auto meta = nlohmann::json::parse(slurp(ra.metadata));
  EXPECT_EQ(meta["scenario_hash"], scenario_hash(s));
  EXPECT_EQ(meta["termination"]["kind"], "completed");
  EXPECT_EQ(meta["samples"], ra.trajectory.samples.size());
  EXPECT_EQ(meta["scenario"]["integrator"]["dt"], 0.01);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, SingularApproachExitCode) {
  Scenario s = parse_scenario(kRawHelix);
  s.path = BuiltinPathSpec{"cylinder_intersection", 0, 1.5, 2, 1};
  s.k1 = s.k2 = 2;
  s.initial_state = {0, 0, 2.0563};
  s.t_end = 10;
  s.integrator.dt = 1e-3;
  s.output.svg = false;
  const fs::path dir = scratch("run_singular");
  const RunArtifactSet r = run(s, dir);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(r.svgs.empty());
  EXPECT_FALSE(fs::exists(dir / "traj3d.svg"));
  fs::remove_all(dir);
}

TEST(Svg, SelfContainedAndDeterministic) {
  const Scenario s = parse_scenario(kRawHelix);
  const fs::path dir = scratch("svg");
  const RunArtifactSet r = run(s, dir);
  for (View v : {View::XY, View::XZ, View::YZ, View::Iso}) {
    const std::string svg = plot_trajectory_svg(r.trajectory, v);
    EXPECT_EQ(svg, plot_trajectory_svg(r.trajectory, v));
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(svg.find("href"), std::string::npos);
    EXPECT_EQ(parse_view(to_string(v)), v);
  }
  const std::string err = plot_error_svg(r.trajectory);
  EXPECT_NE(err.find("|e|"), std::string::npos);
  EXPECT_THROW(plot_error_svg(Trajectory{}), std::runtime_error);
  EXPECT_THROW(parse_view("top"), std::invalid_argument);
  fs::remove_all(dir);
}

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gvf3d/dynamics.hpp"
#include "gvf3d/implicit_path.hpp"
#include "gvf3d/vector_field.hpp"

namespace gvf3d {

struct BuiltinPathSpec {
  std::string name = "helix";  // cylinder_intersection | helix | line
  double a = 0.0;
  double b = 0.0;
  double R = 1.0;
  double r = 1.0;

  bool operator==(const BuiltinPathSpec&) const = default;
};

struct ExpressionPathSpec {
  std::string phi1;
  std::string phi2;
  Boundedness boundedness = Boundedness::Unknown;

  bool operator==(const ExpressionPathSpec&) const = default;
};

using PathSpec = std::variant<BuiltinPathSpec, ExpressionPathSpec>;

struct OutputSpec {
  std::string prefix = "trajectory";
  bool svg = true;
  std::string view = "iso";  // xy | xz | yz | iso

  bool operator==(const OutputSpec&) const = default;
};

/// One simulation run, as read from a scenario file with defaults filled in.
struct Scenario {
  std::string name = "scenario";
  PathSpec path;
  double k1 = 1.0;
  double k2 = 1.0;
  SystemKind system = SystemKind::Raw;
  Disturbance disturbance;   // perturbed only
  AircraftParams aircraft;   // aircraft only
  std::vector<double> initial_state{0.0, 0.0, 0.0};  // 3 for flows, 5 for aircraft
  IntegratorConfig integrator;
  double t_end = 60.0;
  OutputSpec output;

  bool operator==(const Scenario&) const = default;

  ImplicitPath build_path() const;
  FieldParams field_params() const { return FieldParams(k1, k2); }
  Vec3 initial_position() const { return Vec3(initial_state[0], initial_state[1], initial_state[2]); }
};

/// Schema violation in a scenario file; field() is the dotted key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parses TOML scenario text. Throws ConfigError on schema violations; an
/// expression parse error is forwarded as ConfigError carrying its offset.
Scenario parse_scenario(std::string_view text, std::string_view source = "<string>");
Scenario load_scenario(const std::filesystem::path& file);

/// Canonical TOML text; parse_scenario(to_toml(s)) == s.
std::string to_toml(const Scenario& s);

/// Hex SHA-256 of the canonical TOML text.
std::string scenario_hash(const Scenario& s);

nlohmann::json to_json(const Scenario& s);

/// 0 completed, 2 singular approach, 3 domain exit, 5 other early stops.
int exit_code(EventKind termination);
inline constexpr int kExitConfigError = 4;
inline constexpr int kExitFailure = 5;

struct RunArtifactSet {
  std::filesystem::path csv;
  std::filesystem::path metadata;
  std::vector<std::filesystem::path> svgs;
  Trajectory trajectory;
  int exit_code = 0;
};

/// Integrates the scenario and writes <prefix>.csv, metadata.json and, when
/// enabled, traj3d.svg and error.svg into out_dir (created if missing).
RunArtifactSet run(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Run metadata document; validates against schemas/run_metadata.schema.json.
nlohmann::json run_metadata(const Scenario& scenario, const Trajectory& traj, const RunArtifactSet& files);

enum class View { XY, XZ, YZ, Iso };

/// Throws std::invalid_argument for an unknown view name.
View parse_view(std::string_view name);
const char* to_string(View v);

/// Orthographic projection of the trajectory (and the desired path, when
/// given) as a self-contained SVG document.
std::string plot_trajectory_svg(const Trajectory& traj, View view, const std::vector<Vec3>& path_points = {});

/// e1, e2 and |e| against time as a self-contained SVG document.
std::string plot_error_svg(const Trajectory& traj);

}  // namespace gvf3d

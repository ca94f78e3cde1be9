#include <fstream>

#include "gvf3d/scenario.hpp"

namespace gvf3d {

int exit_code(EventKind termination) {
  switch (termination) {
    case EventKind::Completed: return 0;
    case EventKind::SingularApproach: return 2;
    case EventKind::DomainExit: return 3;
    case EventKind::StepUnderflow:
    case EventKind::PlanarDegeneracy:
    case EventKind::UnstableEquilibrium: return kExitFailure;
  }
  return kExitFailure;
}

namespace {

Trajectory simulate(const Scenario& s) {
  const ImplicitPath path = s.build_path();
  const FieldParams params = s.field_params();
  const auto& x = s.initial_state;
  switch (s.system) {
    case SystemKind::Raw: return integrate_flow(path, params, s.initial_position(), s.integrator, s.t_end);
    case SystemKind::Normalized:
      return integrate_normalized_flow(path, params, s.initial_position(), s.integrator, s.t_end);
    case SystemKind::Perturbed:
      return integrate_perturbed_flow(path, params, s.initial_position(), s.disturbance, s.integrator, s.t_end);
    case SystemKind::Aircraft:
      return integrate_aircraft(path, params, s.aircraft, AircraftState{x[0], x[1], x[2], x[3], x[4]},
                                s.integrator, s.t_end);
  }
  throw std::logic_error("unhandled system kind");
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

nlohmann::json event_json(const Event& e) {
  return {{"kind", to_string(e.kind)},
          {"t", e.t},
          {"position", {e.position.x(), e.position.y(), e.position.z()}},
          {"detail", e.detail}};
}

// Desired path near the trajectory, for drawing underneath it.
std::vector<Vec3> path_curve(const ImplicitPath& path, const Trajectory& traj) {
  std::vector<Vec3> pts;
  if (!path.parametrization) return pts;
  Vec3 lo = traj.samples.front().position, hi = lo;
  for (const auto& s : traj.samples) {
    lo = lo.cwiseMin(s.position);
    hi = hi.cwiseMax(s.position);
  }
  lo.array() -= 1.0;
  hi.array() += 1.0;
  const auto& pp = *path.parametrization;
  constexpr int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const Vec3 p = pp.point(pp.t_min + (pp.t_max - pp.t_min) * i / n);
    if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) pts.push_back(p);
  }
  return pts;
}

}  // namespace

nlohmann::json run_metadata(const Scenario& scenario, const Trajectory& traj, const RunArtifactSet& files) {
  nlohmann::json events = nlohmann::json::array();
  for (const Event& e : traj.events) events.push_back(event_json(e));
  nlohmann::json svgs = nlohmann::json::array();
  for (const auto& p : files.svgs) svgs.push_back(p.filename().string());
  double max_error = 0.0;
  for (const auto& s : traj.samples) max_error = std::max(max_error, s.e_norm);
  return {{"tool", "gvf3d"},
          {"scenario_name", scenario.name},
          {"scenario_hash", scenario_hash(scenario)},
          {"scenario", to_json(scenario)},
          {"system", to_string(traj.system)},
          {"termination", event_json(traj.termination())},
          {"events", events},
          {"exit_code", files.exit_code},
          {"samples", traj.samples.size()},
          {"t_final", traj.samples.back().t},
          {"initial_error", traj.samples.front().e_norm},
          {"final_error", traj.final_error()},
          {"max_error", max_error},
          {"csv", {{"file", files.csv.filename().string()}, {"columns", csv_columns(traj.system)}}},
          {"svgs", svgs}};
}

RunArtifactSet run(const Scenario& scenario, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunArtifactSet files;
  files.trajectory = simulate(scenario);
  const Trajectory& traj = files.trajectory;
  files.exit_code = exit_code(traj.termination().kind);

  files.csv = out_dir / (scenario.output.prefix + ".csv");
  {
    std::ofstream out(files.csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + files.csv.string());
    write_csv(traj, out);
  }
  if (scenario.output.svg) {
    const ImplicitPath path = scenario.build_path();
    files.svgs.push_back(out_dir / "traj3d.svg");
    write_file(files.svgs.back(), plot_trajectory_svg(traj, parse_view(scenario.output.view), path_curve(path, traj)));
    files.svgs.push_back(out_dir / "error.svg");
    write_file(files.svgs.back(), plot_error_svg(traj));
  }
  files.metadata = out_dir / "metadata.json";
  write_file(files.metadata, run_metadata(scenario, traj, files).dump(2) + "\n");
  return files;
}

}  // namespace gvf3d

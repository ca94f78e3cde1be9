// gvf3d command-line front end.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "gvf3d/analysis.hpp"
#include "gvf3d/scenario.hpp"

namespace fs = std::filesystem;
using namespace gvf3d;

namespace {

Box parse_box(const std::string& text) {
  auto range = [&](const std::string& part) {
    const auto colon = part.find(':', 1);
    if (colon == std::string::npos) throw std::invalid_argument("box range must look like lo:hi, got '" + part + "'");
    const double lo = std::stod(part.substr(0, colon));
    const double hi = std::stod(part.substr(colon + 1));
    if (!(hi > lo)) throw std::invalid_argument("box range '" + part + "' is empty");
    return std::pair{lo, hi};
  };
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i)
    if (i == text.size() || text[i] == ',') {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  Box box;
  if (parts.size() == 1) {
    const auto [lo, hi] = range(parts[0]);
    return Box::cube(lo, hi);
  }
  if (parts.size() != 3) throw std::invalid_argument("box must be lo:hi or xlo:xhi,ylo:yhi,zlo:zhi");
  for (int i = 0; i < 3; ++i) {
    const auto [lo, hi] = range(parts[static_cast<std::size_t>(i)]);
    box.lo[i] = lo;
    box.hi[i] = hi;
  }
  return box;
}

Trajectory read_trajectory(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file);
  return read_csv(in);
}

void print_row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) std::printf("%s%.17g", i ? "," : "", values[i]);
  std::printf("\n");
}

int cmd_simulate(const std::vector<std::string>& files, const std::string& out, int jobs) {
  std::vector<Scenario> scenarios;
  for (const auto& f : files) scenarios.push_back(load_scenario(f));
  const bool sweep = scenarios.size() > 1;
  std::vector<int> codes(scenarios.size(), 0);
  std::atomic<std::size_t> next{0};
  std::mutex io;

  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      const fs::path dir = sweep ? fs::path(out) / fs::path(files[i]).stem() : fs::path(out);
      try {
        const RunArtifactSet r = run(scenarios[i], dir);
        codes[i] = r.exit_code;
        const std::lock_guard lock(io);
        std::printf("%s: %s at t=%.6g, final |e| = %.6g -> %s\n", scenarios[i].name.c_str(),
                    to_string(r.trajectory.termination().kind), r.trajectory.termination().t,
                    r.trajectory.final_error(), dir.string().c_str());
      } catch (const std::exception& e) {
        codes[i] = kExitFailure;
        const std::lock_guard lock(io);
        std::fprintf(stderr, "error: %s: %s\n", files[i].c_str(), e.what());
      }
    }
  };
  std::vector<std::jthread> pool;
  const int n = std::clamp(jobs, 1, static_cast<int>(scenarios.size()));
  for (int j = 0; j < n; ++j) pool.emplace_back(worker);
  pool.clear();
  return *std::max_element(codes.begin(), codes.end());
}

int cmd_analyze(const std::string& csv, bool fit_rate, const std::string& scenario_file, double lambda) {
  const Trajectory traj = read_trajectory(csv);
  double max_error = 0.0;
  for (const auto& s : traj.samples) max_error = std::max(max_error, s.e_norm);
  nlohmann::json out = {{"samples", traj.samples.size()},
                        {"t_final", traj.samples.back().t},
                        {"initial_error", traj.samples.front().e_norm},
                        {"final_error", traj.final_error()},
                        {"max_error", max_error},
                        {"arc_length", arc_length(traj)}};
  if (fit_rate) {
    FieldParams params(1.0, 1.0);
    if (!scenario_file.empty()) {
      const Scenario s = load_scenario(scenario_file);
      params = s.field_params();
      if (lambda < 0.0) {
        std::vector<Vec3> region;
        for (const auto& p : traj.samples) region.push_back(p.position);
        lambda = min_q_eigenvalue(s.build_path(), params, region);
      }
    }
    out["fit"] = to_json(fit_convergence(traj, params, std::max(lambda, 0.0)));
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_find_singular(const std::string& file, const std::string& box, int grid, bool json) {
  const Scenario s = load_scenario(file);
  const SingularSearch r = find_singular_points(s.build_path(), s.field_params(), parse_box(box), grid);
  if (json) {
    std::cout << to_json(r).dump(2) << "\n";
  } else {
    std::printf("x,y,z,residual,tau_norm\n");
    for (const auto& p : r.points)
      print_row({p.location.x(), p.location.y(), p.location.z(), p.residual, p.tau_norm});
  }
  std::fprintf(stderr, "%zu singular point(s) from %d seed(s), %d not converged\n", r.points.size(), r.seeds,
               r.non_converged);
  return 0;
}

int cmd_probe(const std::string& file, const std::string& box_spec, int samples, int grid) {
  const Scenario s = load_scenario(file);
  const ImplicitPath path = s.build_path();
  const Box box = parse_box(box_spec);
  std::vector<Vec3> singulars;
  for (const auto& p : find_singular_points(path, s.field_params(), box, grid).points) singulars.push_back(p.location);
  const AssumptionReport r = probe_assumptions(path, s.field_params(), singulars, box, samples);
  std::cout << to_json(r).dump(2) << "\n";
  std::fprintf(stderr, "%s\n", r.label.c_str());
  return 0;
}

int cmd_iss(const std::string& file, const std::vector<double>& amplitudes, double t_end, bool json) {
  const Scenario s = load_scenario(file);
  const IssSweep r =
      iss_ultimate_bound(s.build_path(), s.field_params(), s.initial_position(), amplitudes, t_end, s.integrator);
  if (json) {
    std::cout << to_json(r).dump(2) << "\n";
  } else {
    std::printf("amplitude,bound,diverged\n");
    for (const auto& e : r.entries) std::printf("%.17g,%.17g,%s\n", e.amplitude, e.bound, e.diverged ? "true" : "false");
  }
  if (!r.monotone) std::fprintf(stderr, "warning: bounds are not monotone in amplitude\n");
  return 0;
}

int cmd_plot(const std::string& csv, const std::string& kind, const std::string& out, const std::string& view) {
  const Trajectory traj = read_trajectory(csv);
  const std::string svg = kind == "error" ? plot_error_svg(traj) : plot_trajectory_svg(traj, parse_view(view));
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << svg;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guiding vector field path-following simulator and analysis tools"};
  app.require_subcommand(1);

  std::vector<std::string> scenario_files;
  std::string out_dir;
  int jobs = 1;
  auto* simulate = app.add_subcommand("simulate", "Run one or more scenario files");
  simulate->add_option("scenario", scenario_files, "Scenario TOML file(s)")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", out_dir, "Output directory")->required();
  simulate->add_option("-j,--jobs", jobs, "Parallel runs in a sweep")->check(CLI::PositiveNumber);

  std::string csv;
  bool fit_rate = false;
  std::string fit_scenario;
  double lambda = -1.0;
  auto* analyze = app.add_subcommand("analyze", "Summarize a trajectory CSV");
  analyze->add_option("csv", csv, "Trajectory CSV")->required();
  analyze->add_flag("--fit-rate", fit_rate, "Fit the exponential decay rate of |e|");
  analyze->add_option("--scenario", fit_scenario, "Scenario supplying gains and the path for lambda");
  analyze->add_option("--lambda", lambda, "Lower bound on the eigenvalues of Q");

  std::string scenario_file;
  std::string box = "-4:4";
  int grid = 40;
  bool json = false;
  auto* find = app.add_subcommand("find-singular", "Locate points where the field vanishes");
  find->add_option("scenario", scenario_file, "Scenario TOML file")->required();
  find->add_option("--box", box, "lo:hi or xlo:xhi,ylo:yhi,zlo:zhi");
  find->add_option("--grid", grid, "Seed grid points per axis")->check(CLI::Range(2, 1000));
  find->add_flag("--json", json, "Print JSON instead of CSV rows");

  int samples = 100000;
  auto* probe = app.add_subcommand("probe-assumptions", "Sampled estimates for the path assumptions");
  probe->add_option("scenario", scenario_file, "Scenario TOML file")->required();
  probe->add_option("--samples", samples, "Quasi-random samples in the box")->check(CLI::Range(1000, 100000000));
  probe->add_option("--box", box, "lo:hi or xlo:xhi,ylo:yhi,zlo:zhi");
  probe->add_option("--grid", grid, "Seed grid for the singular search");

  std::vector<double> amplitudes{0.01, 0.05, 0.1};
  double t_end = 30.0;
  auto* iss = app.add_subcommand("iss-sweep", "Ultimate error bound under constant disturbances");
  iss->add_option("scenario", scenario_file, "Scenario TOML file")->required();
  iss->add_option("--amplitudes", amplitudes, "Comma-separated disturbance norms, ascending")->delimiter(',');
  iss->add_option("--t-end", t_end, "Run length per amplitude")->check(CLI::PositiveNumber);
  iss->add_flag("--json", json, "Print JSON instead of CSV rows");

  std::string kind = "traj3d", svg_out, view = "iso";
  auto* plot = app.add_subcommand("plot", "Render a trajectory CSV as SVG");
  plot->add_option("csv", csv, "Trajectory CSV")->required();
  plot->add_option("--kind", kind, "traj3d or error")->check(CLI::IsMember({"traj3d", "error"}));
  plot->add_option("-o,--out", svg_out, "Output SVG file")->required();
  plot->add_option("--view", view, "xy, xz, yz or iso")->check(CLI::IsMember({"xy", "xz", "yz", "iso"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(scenario_files, out_dir, jobs);
    if (*analyze) return cmd_analyze(csv, fit_rate, fit_scenario, lambda);
    if (*find) return cmd_find_singular(scenario_file, box, grid, json);
    if (*probe) return cmd_probe(scenario_file, box, samples, grid);
    if (*iss) return cmd_iss(scenario_file, amplitudes, t_end, json);
    if (*plot) return cmd_plot(csv, kind, svg_out, view);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return 0;
}

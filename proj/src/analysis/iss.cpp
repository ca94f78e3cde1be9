#include <algorithm>
#include <future>
#include <stdexcept>

#include "gvf3d/analysis.hpp"

namespace gvf3d {

Vec3 worst_case_direction(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0) {
  const FieldSample s = sample_field(path, params, xi0);
  if (!s.valid) throw std::invalid_argument("initial point outside the field domain");
  if (s.nke.norm() > 0.0) return s.nke.normalized();
  const Vec3 n1 = s.N.col(0);
  if (n1.norm() > 0.0) return n1.normalized();
  return Vec3::UnitX();
}

IssEntry iss_bound(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0, const Disturbance& d,
                   double t_end, const IntegratorConfig& cfg) {
  const Trajectory traj = integrate_perturbed_flow(path, params, xi0, d, cfg, t_end);
  IssEntry entry;
  entry.amplitude = d.sup_norm();
  entry.termination = to_string(traj.termination().kind);
  const double e0 = traj.samples.front().e_norm;
  const double limit = std::max(2.0 * e0, 1.0);
  const double tail_start = 0.8 * t_end;
  for (const TrajectorySample& s : traj.samples) {
    if (s.e_norm > limit) entry.diverged = true;
    if (s.t >= tail_start) entry.bound = std::max(entry.bound, s.e_norm);
  }
  if (!traj.completed()) entry.diverged = true;
  return entry;
}

IssSweep iss_ultimate_bound(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0,
                            const std::vector<double>& amplitudes, double t_end, const IntegratorConfig& cfg) {
  if (!std::is_sorted(amplitudes.begin(), amplitudes.end()))
    throw std::invalid_argument("amplitudes must be sorted ascending");
  if (!amplitudes.empty() && !(amplitudes.front() >= 0.0))
    throw std::invalid_argument("amplitudes must be non-negative");

  IssSweep sweep;
  sweep.direction = worst_case_direction(path, params, xi0);
  std::vector<std::future<IssEntry>> runs;
  for (double A : amplitudes) {
    const Disturbance d = A == 0.0 ? Disturbance::zero() : Disturbance::constant(A * sweep.direction);
    runs.push_back(std::async(std::launch::async, [&, d, A] {
      IssEntry e = iss_bound(path, params, xi0, d, t_end, cfg);
      e.amplitude = A;
      return e;
    }));
  }
  for (auto& r : runs) sweep.entries.push_back(r.get());
  for (std::size_t i = 1; i < sweep.entries.size(); ++i)
    if (sweep.entries[i].bound < sweep.entries[i - 1].bound - 1e-9) sweep.monotone = false;
  return sweep;
}

}  // namespace gvf3d

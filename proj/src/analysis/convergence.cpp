#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gvf3d/analysis.hpp"

namespace gvf3d {

RateFit fit_convergence(const Trajectory& traj, const FieldParams& params, double lambda, double floor) {
  if (traj.samples.size() < 2) throw FitRefused("trajectory has fewer than two samples");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  RateFit fit;
  fit.e0 = traj.samples.front().e_norm;
  const double e_final = traj.samples.back().e_norm;
  if (!(fit.e0 > 0.0)) throw FitRefused("initial error is zero");
  if (!(e_final < 0.1 * fit.e0)) throw FitRefused("trajectory did not converge (final error >= 0.1 initial error)");

  const double k_max = params.k_max();
  fit.lambda = lambda;
  fit.theoretical_rate = lambda / k_max;
  fit.c = std::sqrt(k_max / params.k_min());

  const double t0 = traj.samples.front().t;
  double sum_t = 0, sum_y = 0, sum_tt = 0, sum_ty = 0;
  for (const TrajectorySample& s : traj.samples) {
    const double t = s.t - t0;
    const double envelope = fit.c * fit.e0 * std::exp(-0.99 * lambda * t / k_max) * (1.0 + 1e-6);
    if (s.e_norm > envelope + floor) ++fit.violations;
    if (s.e_norm >= 1e-8 && s.e_norm <= 0.5 * fit.e0) {
      const double y = std::log(s.e_norm);
      sum_t += t;
      sum_y += y;
      sum_tt += t * t;
      sum_ty += t * y;
      ++fit.window;
    }
  }
  if (fit.window < 2) throw FitRefused("fit window holds fewer than two samples");
  const double n = fit.window;
  const double denom = n * sum_tt - sum_t * sum_t;
  if (!(denom > 0.0)) throw FitRefused("fit window spans no time");
  fit.fitted_rate = -(n * sum_ty - sum_t * sum_y) / denom;
  return fit;
}

RateFit fit_convergence(const Trajectory& traj, const ImplicitPath& path, const FieldParams& params,
                        const std::vector<Vec3>& region_samples, double floor) {
  if (region_samples.empty()) throw std::invalid_argument("region_samples is empty");
  return fit_convergence(traj, params, min_q_eigenvalue(path, params, region_samples), floor);
}

double arc_length(const Trajectory& traj) {
  double L = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i)
    L += (traj.samples[i].position - traj.samples[i - 1].position).norm();
  return L;
}

std::vector<Vec3> resample_by_arc_length(const Trajectory& traj, int n) {
  if (n < 2) throw std::invalid_argument("resampling needs at least two points");
  const auto& s = traj.samples;
  std::vector<double> cum(s.size(), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) cum[i] = cum[i - 1] + (s[i].position - s[i - 1].position).norm();
  const double L = s.empty() ? 0.0 : cum.back();
  if (!(L > 0.0)) throw std::invalid_argument("curve has zero arc length");

  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  std::size_t seg = 1;
  for (int j = 0; j < n; ++j) {
    const double target = j == n - 1 ? L : L * j / (n - 1);
    while (seg < s.size() - 1 && cum[seg] < target) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double u = len > 0.0 ? std::clamp((target - cum[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out.push_back((1.0 - u) * s[seg - 1].position + u * s[seg].position);
  }
  return out;
}

double phase_portrait_distance(const Trajectory& a, const Trajectory& b, int n) {
  const std::vector<Vec3> ra = resample_by_arc_length(a, n);
  const std::vector<Vec3> rb = resample_by_arc_length(b, n);
  double d = 0.0;
  for (int i = 0; i < n; ++i) d = std::max(d, (ra[i] - rb[i]).norm());
  return d;
}

}  // namespace gvf3d

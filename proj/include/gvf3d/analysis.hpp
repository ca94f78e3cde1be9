#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gvf3d/dynamics.hpp"
#include "gvf3d/implicit_path.hpp"
#include "gvf3d/vector_field.hpp"

namespace gvf3d {

/// Axis-aligned box [lo, hi].
struct Box {
  Vec3 lo = Vec3::Constant(-4.0);
  Vec3 hi = Vec3::Constant(4.0);

  static Box cube(double lo, double hi) { return Box{Vec3::Constant(lo), Vec3::Constant(hi)}; }
  bool contains(const Vec3& p, double slack = 0.0) const;
  bool operator==(const Box&) const = default;
};

struct SingularPoint {
  Vec3 location = Vec3::Zero();
  double residual = 0.0;  // |chi| at location
  double tau_norm = 0.0;
  std::vector<Vec3> basin_sample;  // seeds that converged here
};

struct SingularSearch {
  std::vector<SingularPoint> points;  // lexicographic order
  int seeds = 0;
  int non_converged = 0;
};

/// Newton iteration on chi = 0 seeded at grid points where |chi| is a local
/// minimum over the 26-neighborhood. Roots within 1e-6 are merged.
/// Throws std::invalid_argument when grid_n < 2 or the box is empty.
SingularSearch find_singular_points(const ImplicitPath& path, const FieldParams& params, const Box& box, int grid_n);

/// Nearest-point distance from xi to P.
struct PathDistance {
  double distance = 0.0;
  Vec3 nearest = Vec3::Zero();
  bool low_confidence = false;  // no parametrization; projection only
};

/// Distance estimator for one path. With a parametrization, the path is
/// sampled at 4096 parameters and the nearest sample refined by a 1-D
/// minimization; otherwise a Gauss-Newton projection onto phi = 0 is used.
class PathDistanceEstimator {
 public:
  explicit PathDistanceEstimator(const ImplicitPath& path, int samples = 4096);

  PathDistance operator()(const Vec3& xi) const;
  const std::vector<Vec3>& samples() const { return samples_; }
  bool has_parametrization() const { return has_param_; }

 private:
  const ImplicitPath& path_;
  bool has_param_ = false;
  std::vector<double> params_;
  std::vector<Vec3> samples_;
};

/// Gauss-Newton projection of a point onto {phi1 = phi2 = 0}. Returns false
/// when the iteration fails to reach |e| < 1e-12.
bool project_to_path(const ImplicitPath& path, const Vec3& xi, Vec3& out);

/// Sampled estimates for the three standing assumptions on P, C and M.
/// A sampled estimate can falsify an assumption but cannot certify it.
struct AssumptionReport {
  double est_dist_P_C = std::numeric_limits<double>::infinity();  // infinite when C is empty
  std::vector<double> kappas;
  std::vector<double> inf_error;  // inf |e| over dist(xi, P) >= kappa
  std::vector<double> inf_nke;    // inf |NKe| over dist(xi, M) >= kappa
  std::vector<int> shell_counts;  // samples with dist(xi, P) >= kappa
  Box box;
  int n_samples = 0;
  bool low_confidence = false;
  std::string label = "sampled estimate - can falsify, cannot certify";
};

inline const std::vector<double> kDefaultKappas{0.0, 0.05, 0.1, 0.25, 0.5, 1.0};

/// Samples the box on a Halton sequence (plus the on-path samples) and
/// bins each point by its distance to P and to M = P u C.
AssumptionReport probe_assumptions(const ImplicitPath& path, const FieldParams& params,
                                   const std::vector<Vec3>& singulars, const Box& box, int n_samples,
                                   const std::vector<double>& kappas = kDefaultKappas);

/// Points of the tube E_delta = { |e| <= delta } near P, drawn by offsetting
/// parametrization samples along the normal plane. Requires a parametrization.
std::vector<Vec3> sample_tube(const ImplicitPath& path, double delta, int n, std::uint64_t seed = 1);

/// Smallest eigenvalue of Q over the given points.
double min_q_eigenvalue(const ImplicitPath& path, const FieldParams& params, const std::vector<Vec3>& points);

struct RateFit {
  double fitted_rate = 0.0;       // 1/s, from a log-linear fit of |e(t)|
  double lambda = 0.0;            // min lambda_min(Q) over the region
  double theoretical_rate = 0.0;  // lambda / k_max
  double c = 1.0;                 // sqrt(k_max / k_min)
  double e0 = 0.0;
  int violations = 0;
  int window = 0;  // samples used by the fit
};

class FitRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Absolute error level below which the envelope is not checked: once |e|
/// reaches the truncation floor of the fixed-step integrator it stops
/// decaying. Matches the lower end of the fit window.
inline constexpr double kEnvelopeFloor = 1e-8;

/// Envelope |e(t)| <= c |e0| exp(-0.99 lambda t / k_max) checked pointwise
/// (1e-6 relative slack plus floor), rate fitted over |e| in [1e-8, 0.5 |e0|].
/// Throws FitRefused unless the final error is below 0.1 |e0|.
RateFit fit_convergence(const Trajectory& traj, const FieldParams& params, double lambda,
                        double floor = kEnvelopeFloor);
RateFit fit_convergence(const Trajectory& traj, const ImplicitPath& path, const FieldParams& params,
                        const std::vector<Vec3>& region_samples, double floor = kEnvelopeFloor);

/// Positions resampled at n points uniformly spaced in arc length.
/// Throws std::invalid_argument on a curve of zero length.
std::vector<Vec3> resample_by_arc_length(const Trajectory& traj, int n = 512);
double arc_length(const Trajectory& traj);

/// Max pointwise distance between the two arc-length resampled curves.
double phase_portrait_distance(const Trajectory& a, const Trajectory& b, int n = 512);

struct IssEntry {
  double amplitude = 0.0;
  double bound = 0.0;  // sup |e| over the final 20% of the run
  bool diverged = false;
  std::string termination;
};

struct IssSweep {
  std::vector<IssEntry> entries;
  Vec3 direction = Vec3::Zero();
  bool monotone = true;  // non-decreasing with 1e-9 slack
};

/// Unit vector maximizing d^T N K e at xi0 (n1 direction when NKe = 0).
Vec3 worst_case_direction(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0);

/// Ultimate bound of |e| under one disturbance, and whether |e| left the
/// neighborhood max(2 |e0|, 1).
IssEntry iss_bound(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0, const Disturbance& d,
                   double t_end, const IntegratorConfig& cfg = {});

/// One perturbed run per amplitude with a constant worst-case-aligned
/// disturbance; runs execute concurrently.
IssSweep iss_ultimate_bound(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0,
                            const std::vector<double>& amplitudes, double t_end, const IntegratorConfig& cfg = {});

/// Level beta = alpha / 2 where alpha is the minimum of V over the sphere of
/// radius r about center, sampled at n Fibonacci points. Omega_beta is the
/// part of { V <= beta } inside that sphere.
double omega_beta_level(const ImplicitPath& path, const FieldParams& params, const Vec3& center, double r,
                        int n = 20000);

nlohmann::json to_json(const SingularSearch& s);
nlohmann::json to_json(const AssumptionReport& r);
nlohmann::json to_json(const RateFit& f);
nlohmann::json to_json(const IssSweep& s);

}  // namespace gvf3d

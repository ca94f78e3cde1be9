#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "gvf3d/analysis.hpp"
#include "parallel.hpp"

namespace gvf3d {

namespace {

double radical_inverse(std::uint64_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

struct Surfaces {
  Vec2 e;
  Mat32 N;
  bool valid;
};

Surfaces evaluate(const ImplicitPath& path, const Vec3& p) {
  const FieldEval f1 = path.phi1(p);
  const FieldEval f2 = path.phi2(p);
  Surfaces s;
  s.e = Vec2(f1.value, f2.value);
  s.N.col(0) = f1.gradient;
  s.N.col(1) = f2.gradient;
  s.valid = !f1.domain_error && !f2.domain_error && s.e.allFinite() && s.N.allFinite();
  return s;
}

// Minimum-norm Newton correction p -> p - N (N^T N)^-1 e.
bool newton_correction(const Surfaces& s, Vec3& step) {
  const Mat2 G = s.N.transpose() * s.N;
  const Eigen::FullPivLU<Mat2> lu(G);
  if (!lu.isInvertible()) return false;
  step = -s.N * lu.solve(s.e);
  return step.allFinite();
}

}  // namespace

bool project_to_path(const ImplicitPath& path, const Vec3& xi, Vec3& out) {
  Vec3 p = xi;
  Surfaces s = evaluate(path, p);
  if (!s.valid) return false;
  for (int it = 0; it < 100 && s.e.norm() >= 1e-12; ++it) {
    Vec3 step;
    if (!newton_correction(s, step)) return false;
    double lambda = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
      const Surfaces t = evaluate(path, p + lambda * step);
      if (t.valid && t.e.norm() < s.e.norm()) {
        p += lambda * step;
        s = t;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  out = p;
  return s.e.norm() < 1e-12;
}

PathDistanceEstimator::PathDistanceEstimator(const ImplicitPath& path, int samples) : path_(path) {
  if (!path.parametrization) return;
  has_param_ = true;
  const PathParametrization& pp = *path.parametrization;
  const int n = std::max(samples, 2);
  const double span = pp.t_max - pp.t_min;
  const double dt = pp.closed ? span / n : span / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double t = pp.t_min + i * dt;
    params_.push_back(t);
    samples_.push_back(pp.point(t));
  }
}

PathDistance PathDistanceEstimator::operator()(const Vec3& xi) const {
  PathDistance out;
  if (!has_param_) {
    // Project, then slide along the tangent toward xi and re-project.
    out.low_confidence = true;
    Vec3 p;
    if (!project_to_path(path_, xi, p)) {
      out.distance = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
    for (int it = 0; it < 50; ++it) {
      const Surfaces s = evaluate(path_, p);
      const Vec3 tau = s.N.col(0).cross(s.N.col(1));
      if (!(tau.norm() > 0.0)) break;
      const Vec3 t_hat = tau.normalized();
      const double slide = t_hat.dot(xi - p);
      if (std::abs(slide) < 1e-12) break;
      Vec3 q;
      if (!project_to_path(path_, p + slide * t_hat, q)) break;
      p = q;
    }
    out.nearest = p;
    out.distance = (xi - p).norm();
    return out;
  }

  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const double d2 = (samples_[i] - xi).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  out.nearest = samples_[best];
  out.distance = std::sqrt(best_d2);

  // Golden-section refinement over the two neighboring parameter intervals.
  const PathParametrization& pp = *path_.parametrization;
  const double dt = params_.size() > 1 ? params_[1] - params_[0] : 0.0;
  double lo = params_[best] - dt, hi = params_[best] + dt;
  if (!pp.closed) {
    lo = std::max(lo, pp.t_min);
    hi = std::min(hi, pp.t_max);
  }
  auto wrap = [&](double t) {
    if (!pp.closed) return t;
    const double span = pp.t_max - pp.t_min;
    double w = std::fmod(t - pp.t_min, span);
    if (w < 0) w += span;
    return pp.t_min + w;
  };
  auto dist = [&](double t) { return (pp.point(wrap(t)) - xi).norm(); };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = dist(c), fd = dist(d);
  for (int it = 0; it < 80 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = dist(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = dist(d);
    }
  }
  const double t = 0.5 * (a + b);
  const double refined = dist(t);
  if (refined < out.distance) {
    out.distance = refined;
    out.nearest = pp.point(wrap(t));
  }
  return out;
}

AssumptionReport probe_assumptions(const ImplicitPath& path, const FieldParams& params,
                                   const std::vector<Vec3>& singulars, const Box& box, int n_samples,
                                   const std::vector<double>& kappas) {
  if (n_samples < 1000) throw std::invalid_argument("probe_assumptions needs at least 1000 samples");
  if (!((box.hi.array() > box.lo.array()).all())) throw std::invalid_argument("box must have positive extent");

  const PathDistanceEstimator estimator(path);
  AssumptionReport report;
  report.box = box;
  report.n_samples = n_samples;
  report.kappas = kappas;
  report.low_confidence = !estimator.has_parametrization();

  for (const Vec3& c : singulars) report.est_dist_P_C = std::min(report.est_dist_P_C, estimator(c).distance);

  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(n_samples) + estimator.samples().size());
  const Vec3 extent = box.hi - box.lo;
  for (int i = 0; i < n_samples; ++i) {
    const auto k = static_cast<std::uint64_t>(i + 1);
    points.push_back(box.lo + Vec3(radical_inverse(k, 2), radical_inverse(k, 3), radical_inverse(k, 5))
                                  .cwiseProduct(extent));
  }
  const std::size_t on_path_begin = points.size();
  for (const Vec3& p : estimator.samples())
    if (box.contains(p)) points.push_back(p);

  std::vector<double> e_norm(points.size()), nke_norm(points.size()), d_P(points.size()), d_M(points.size());
  detail::parallel_for(points.size(), [&](std::size_t i) {
    const FieldSample s = sample_field(path, params, points[i]);
    e_norm[i] = s.valid ? s.e.norm() : std::numeric_limits<double>::quiet_NaN();
    nke_norm[i] = s.valid ? s.nke.norm() : std::numeric_limits<double>::quiet_NaN();
    d_P[i] = i >= on_path_begin ? 0.0 : estimator(points[i]).distance;
    double dm = d_P[i];
    for (const Vec3& c : singulars) dm = std::min(dm, (points[i] - c).norm());
    d_M[i] = dm;
  });

  for (double kappa : kappas) {
    double inf_e = std::numeric_limits<double>::infinity();
    double inf_n = std::numeric_limits<double>::infinity();
    int count = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (std::isnan(e_norm[i])) continue;
      if (d_P[i] >= kappa) {
        inf_e = std::min(inf_e, e_norm[i]);
        ++count;
      }
      if (d_M[i] >= kappa) inf_n = std::min(inf_n, nke_norm[i]);
    }
    report.inf_error.push_back(inf_e);
    report.inf_nke.push_back(inf_n);
    report.shell_counts.push_back(count);
  }
  return report;
}

std::vector<Vec3> sample_tube(const ImplicitPath& path, double delta, int n, std::uint64_t seed) {
  if (!path.parametrization) throw std::invalid_argument("sample_tube requires a parametrized path");
  if (!(delta > 0.0)) throw std::invalid_argument("tube radius must be positive");
  const PathParametrization& pp = *path.parametrization;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (long attempt = 0; static_cast<int>(out.size()) < n && attempt < 100L * n; ++attempt) {
    const Vec3 p = pp.point(pp.t_min + unit(rng) * (pp.t_max - pp.t_min));
    const double radius = delta * std::sqrt(unit(rng));
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    const Surfaces s = evaluate(path, p);
    if (!s.valid) continue;
    const Mat2 G = s.N.transpose() * s.N;
    const Eigen::FullPivLU<Mat2> lu(G);
    if (!lu.isInvertible()) continue;
    const Vec3 xi = p + s.N * lu.solve(Vec2(radius * std::cos(angle), radius * std::sin(angle)));
    const Surfaces at = evaluate(path, xi);
    if (at.valid && at.e.norm() <= delta) out.push_back(xi);
  }
  return out;
}

double min_q_eigenvalue(const ImplicitPath& path, const FieldParams& params, const std::vector<Vec3>& points) {
  double lambda = std::numeric_limits<double>::infinity();
  for (const Vec3& p : points) {
    const FieldSample s = sample_field(path, params, p);
    if (s.valid) lambda = std::min(lambda, q_matrix(s).eigenvalues[0]);
  }
  return lambda;
}

double omega_beta_level(const ImplicitPath& path, const FieldParams& params, const Vec3& center, double r, int n) {
  if (!(r > 0.0) || n < 1) throw std::invalid_argument("sphere radius and sample count must be positive");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double rho = std::sqrt(1.0 - z * z);
    const double phi = golden * i;
    const Vec3 p = center + r * Vec3(rho * std::cos(phi), rho * std::sin(phi), z);
    const FieldSample s = sample_field(path, params, p);
    if (s.valid) alpha = std::min(alpha, s.V);
  }
  return 0.5 * alpha;
}

}  // namespace gvf3d

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "gvf3d/analysis.hpp"

namespace gvf3d {

bool Box::contains(const Vec3& p, double slack) const {
  return (p.array() >= lo.array() - slack).all() && (p.array() <= hi.array() + slack).all();
}

namespace {

constexpr double kRootTolerance = 1e-10;
constexpr double kMergeRadius = 1e-6;
constexpr int kMaxIterations = 100;

struct NewtonResult {
  bool converged = false;
  Vec3 x = Vec3::Zero();
  double residual = 0.0;
};

// Newton on chi = 0 with backtracking; falls back to Levenberg-Marquardt
// steps when J is (nearly) singular or the Newton direction does not reduce |chi|.
NewtonResult newton(const ImplicitPath& path, const FieldParams& params, Vec3 x) {
  NewtonResult out;
  FieldSample s = sample_field(path, params, x);
  if (!s.valid) return out;
  double r = s.chi.norm();
  double mu = 1e-3;
  for (int it = 0; it < kMaxIterations && r >= kRootTolerance; ++it) {
    const Mat3 J = jacobian_field(s);
    Vec3 step = Vec3::Zero();
    const Eigen::FullPivLU<Mat3> lu(J);
    bool newton_ok = lu.isInvertible() && lu.rcond() > 1e-14;
    if (newton_ok) step = -lu.solve(s.chi);

    bool moved = false;
    for (int attempt = 0; attempt < 2 && !moved; ++attempt) {
      if (attempt == 1 || !newton_ok || !step.allFinite()) {
        const Mat3 A = J.transpose() * J + mu * Mat3::Identity();
        step = -A.ldlt().solve(J.transpose() * s.chi);
      }
      double lambda = 1.0;
      for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
        const Vec3 trial = x + lambda * step;
        const FieldSample ts = sample_field(path, params, trial);
        if (!ts.valid) continue;
        const double tr = ts.chi.norm();
        if (tr < r) {
          x = trial;
          s = ts;
          r = tr;
          moved = true;
          break;
        }
      }
      if (attempt == 1) mu = moved ? std::max(mu * 0.3, 1e-12) : mu * 10.0;
    }
    if (!moved) break;
  }
  out.converged = r < kRootTolerance;
  out.x = x;
  out.residual = r;
  return out;
}

// Coordinates are compared on a 1e-9 grid so roundoff-level noise (e.g.
// x = +-1e-17 for points on a symmetry plane) does not decide the order.
bool lex_less(const Vec3& a, const Vec3& b) {
  for (int i = 0; i < 3; ++i) {
    const double ka = std::round(a[i] * 1e9), kb = std::round(b[i] * 1e9);
    if (ka != kb) return ka < kb;
  }
  return false;
}

}  // namespace

SingularSearch find_singular_points(const ImplicitPath& path, const FieldParams& params, const Box& box, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("grid_n must be at least 2");
  if (!((box.hi.array() > box.lo.array()).all())) throw std::invalid_argument("box must have positive extent");

  const int n = grid_n;
  const Vec3 h = (box.hi - box.lo) / static_cast<double>(n - 1);
  auto index = [n](int i, int j, int k) { return (static_cast<std::size_t>(i) * n + j) * n + k; };
  auto point = [&](int i, int j, int k) { return Vec3(box.lo + Vec3(i * h.x(), j * h.y(), k * h.z())); };

  std::vector<double> chi(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const FieldSample s = sample_field(path, params, point(i, j, k));
        chi[index(i, j, k)] = s.valid ? s.chi.norm() : std::numeric_limits<double>::infinity();
      }

  SingularSearch result;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double c = chi[index(i, j, k)];
        if (!std::isfinite(c)) continue;
        bool minimum = true;
        for (int di = -1; di <= 1 && minimum; ++di)
          for (int dj = -1; dj <= 1 && minimum; ++dj)
            for (int dk = -1; dk <= 1 && minimum; ++dk) {
              if (di == 0 && dj == 0 && dk == 0) continue;
              const int a = i + di, b = j + dj, e = k + dk;
              if (a < 0 || b < 0 || e < 0 || a >= n || b >= n || e >= n) continue;
              if (chi[index(a, b, e)] < c) minimum = false;
            }
        if (!minimum) continue;

        ++result.seeds;
        const Vec3 seed = point(i, j, k);
        const NewtonResult root = newton(path, params, seed);
        if (!root.converged || !box.contains(root.x, 1e-9)) {
          ++result.non_converged;
          continue;
        }
        auto found = std::find_if(result.points.begin(), result.points.end(), [&](const SingularPoint& p) {
          return (p.location - root.x).norm() < kMergeRadius;
        });
        if (found == result.points.end()) {
          SingularPoint p;
          p.location = root.x;
          p.residual = root.residual;
          p.tau_norm = sample_field(path, params, root.x).tau.norm();
          p.basin_sample.push_back(seed);
          result.points.push_back(std::move(p));
        } else {
          found->basin_sample.push_back(seed);
          if (root.residual < found->residual) {
            found->location = root.x;
            found->residual = root.residual;
            found->tau_norm = sample_field(path, params, root.x).tau.norm();
          }
        }
      }

  std::sort(result.points.begin(), result.points.end(),
            [](const SingularPoint& a, const SingularPoint& b) { return lex_less(a.location, b.location); });
  return result;
}

}  // namespace gvf3d

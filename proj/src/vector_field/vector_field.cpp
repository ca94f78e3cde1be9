#include "gvf3d/vector_field.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace gvf3d {

FieldParams::FieldParams(double k1, double k2) : k1_(k1), k2_(k2) {
  if (!(k1 > 0.0) || !(k2 > 0.0) || !std::isfinite(k1) || !std::isfinite(k2))
    throw std::invalid_argument("field gains k1, k2 must be finite and positive");
}

Mat2 FieldParams::K() const {
  Mat2 k = Mat2::Zero();
  k(0, 0) = k1_;
  k(1, 1) = k2_;
  return k;
}

double FieldSample::singular_threshold() const { return 1e-9 * (1.0 + tau.norm() + nke.norm()); }

FieldSample sample_field(const ImplicitPath& path, const FieldParams& params, const Vec3& xi) {
  FieldSample s;
  s.xi = xi;
  s.K = params.K();
  const FieldEval f1 = path.phi1(xi);
  const FieldEval f2 = path.phi2(xi);
  if (f1.domain_error || f2.domain_error || !xi.allFinite()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.valid = false;
    s.e.setConstant(nan);
    s.N.setConstant(nan);
    s.tau.setConstant(nan);
    s.nke.setConstant(nan);
    s.chi.setConstant(nan);
    s.chi_hat.setConstant(nan);
    s.V = nan;
    s.Q.setConstant(nan);
    return s;
  }
  s.e = Vec2(f1.value, f2.value);
  s.N.col(0) = f1.gradient;
  s.N.col(1) = f2.gradient;
  s.hessians = {f1.hessian, f2.hessian};
  s.tau = f1.gradient.cross(f2.gradient);
  s.nke = params.k1() * s.e[0] * f1.gradient + params.k2() * s.e[1] * f2.gradient;
  s.chi = s.tau - s.nke;
  s.V = 0.5 * (params.k1() * s.e[0] * s.e[0] + params.k2() * s.e[1] * s.e[1]);
  s.Q = s.K * s.N.transpose() * s.N * s.K;
  const double chi_norm = s.chi.norm();
  s.chi_hat_defined = chi_norm > s.singular_threshold();
  if (s.chi_hat_defined) {
    s.chi_hat = s.chi / chi_norm;
  } else {
    s.chi_hat.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return s;
}

QSpectrum q_matrix(const FieldSample& sample) {
  QSpectrum out;
  out.Q = sample.Q;
  const double a = sample.Q(0, 0);
  const double b = 0.5 * (sample.Q(0, 1) + sample.Q(1, 0));
  const double d = sample.Q(1, 1);
  out.trace = a + d;
  out.det = a * d - b * b;
  // Closed-form symmetric 2x2 eigenvalues; the hypot form stays accurate when
  // the two eigenvalues are close.
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  out.eigenvalues = Vec2(mean - radius, mean + radius);
  return out;
}

SetMembership classify(const FieldSample& sample, const MembershipTolerances& eps) {
  SetMembership m;
  m.tolerances = eps;
  const bool rank_deficient = sample.tau.norm() <= eps.eps_rank;
  m.in_M = sample.nke.norm() <= eps.eps_M;
  m.in_C = m.in_M && rank_deficient;
  m.in_C_prime = !m.in_M && rank_deficient;
  return m;
}

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

}  // namespace

Mat3 jacobian_field(const FieldSample& s) {
  const Vec3 n1 = s.N.col(0);
  const Vec3 n2 = s.N.col(1);
  const double k1 = s.K(0, 0);
  const double k2 = s.K(1, 1);
  Mat3 j = -skew(n2) * s.hessians[0] + skew(n1) * s.hessians[1];
  j -= k1 * (n1 * n1.transpose() + s.e[0] * s.hessians[0]);
  j -= k2 * (n2 * n2.transpose() + s.e[1] * s.hessians[1]);
  return j;
}

Mat3 jacobian_normalized_field(const FieldSample& s) {
  if (!s.valid || !s.chi_hat_defined) throw SingularityError("normalized field undefined: |chi| below threshold");
  const Mat3 projector = Mat3::Identity() - s.chi_hat * s.chi_hat.transpose();
  return projector * jacobian_field(s) / s.chi.norm();
}

Mat23 jacobian_planar_field(const FieldSample& sample) {
  return jacobian_normalized_field(sample).topRows<2>();
}

Mat23 jacobian_planar_field(const ImplicitPath& path, const FieldParams& params, const Vec3& xi) {
  return jacobian_planar_field(sample_field(path, params, xi));
}

}  // namespace gvf3d

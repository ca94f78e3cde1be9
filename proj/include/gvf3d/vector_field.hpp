#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Core>

#include "gvf3d/implicit_path.hpp"

namespace gvf3d {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Gains of the guiding vector field, K = diag(k1, k2).
class FieldParams {
 public:
  /// Throws std::invalid_argument unless both gains are strictly positive.
  FieldParams(double k1, double k2);

  double k1() const { return k1_; }
  double k2() const { return k2_; }
  double k_min() const { return k1_ < k2_ ? k1_ : k2_; }
  double k_max() const { return k1_ < k2_ ? k2_ : k1_; }
  Mat2 K() const;

  bool operator==(const FieldParams&) const = default;

 private:
  double k1_;
  double k2_;
};

/// Every pointwise quantity of the field at xi.
///
///   chi     = tau - N K e,   tau = n1 x n2,   N = [n1 n2]
///   V       = e^T K e / 2
///   Q       = K N^T N K,     det Q = k1^2 k2^2 |tau|^2
struct FieldSample {
  Vec3 xi = Vec3::Zero();
  Vec2 e = Vec2::Zero();
  Mat32 N = Mat32::Zero();
  Vec3 tau = Vec3::Zero();
  Vec3 nke = Vec3::Zero();  // N K e, also the gradient of V
  Vec3 chi = Vec3::Zero();
  Vec3 chi_hat = Vec3::Zero();
  bool chi_hat_defined = false;
  double V = 0.0;
  Mat2 Q = Mat2::Zero();
  std::array<Mat3, 2> hessians{Mat3::Zero(), Mat3::Zero()};
  Mat2 K = Mat2::Identity();
  /// False when either surface function reported a domain error at xi.
  bool valid = true;

  double e_norm() const { return e.norm(); }
  double chi_norm() const { return chi.norm(); }
  double nke_norm() const { return nke.norm(); }
  /// Scale-aware zero threshold for |chi|: 1e-9 (1 + |tau| + |NKe|).
  double singular_threshold() const;
};

FieldSample sample_field(const ImplicitPath& path, const FieldParams& params, const Vec3& xi);

struct QSpectrum {
  Mat2 Q;
  Vec2 eigenvalues;  // ascending
  double det;
  double trace;
};

QSpectrum q_matrix(const FieldSample& sample);

struct MembershipTolerances {
  double eps_M = 1e-8;
  double eps_rank = 1e-8;
};

/// Approximate membership in the invariant set M, the singular set C and the
/// set C' (off M, tau = 0). Reported together with the tolerances used.
struct SetMembership {
  bool in_M = false;
  bool in_C = false;
  bool in_C_prime = false;
  MembershipTolerances tolerances;
};

SetMembership classify(const FieldSample& sample, const MembershipTolerances& eps = {});

/// Raised when a normalized quantity is requested at a (numerically) singular point.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// d chi / d xi assembled from the Hessians of phi1, phi2:
///   J = -[n2]x H1 + [n1]x H2 - sum_i k_i (n_i n_i^T + e_i H_i).
Mat3 jacobian_field(const FieldSample& sample);

/// d chi_hat / d xi = (I - chi_hat chi_hat^T) J / |chi|. Throws SingularityError
/// when chi_hat is undefined.
Mat3 jacobian_normalized_field(const FieldSample& sample);

/// Jacobian of the planar field (chi_hat_1, chi_hat_2) with respect to xi.
/// Throws SingularityError when |chi| is below the singular threshold.
Mat23 jacobian_planar_field(const ImplicitPath& path, const FieldParams& params, const Vec3& xi);
Mat23 jacobian_planar_field(const FieldSample& sample);

}  // namespace gvf3d

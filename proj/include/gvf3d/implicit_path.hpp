#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "gvf3d/expression.hpp"

namespace gvf3d {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Value, gradient and Hessian of a scalar field at one point.
/// domain_error is set (and the numbers are NaN) when the point lies outside
/// the field's domain, e.g. a logarithm of a non-positive argument.
struct FieldEval {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
  bool domain_error = false;

  static FieldEval invalid();
};

/// A twice continuously differentiable map R^3 -> R with exact derivatives.
///
/// Cheap to copy; the evaluator is shared and immutable, so a ScalarField may
/// be evaluated from many threads at once.
class ScalarField {
 public:
  using Evaluator = std::function<FieldEval(const Vec3&)>;

  ScalarField() = default;
  ScalarField(std::string description, Evaluator evaluator);

  FieldEval operator()(const Vec3& xi) const { return (*evaluator_)(xi); }
  double value(const Vec3& xi) const { return (*evaluator_)(xi).value; }

  const std::string& description() const { return description_; }
  explicit operator bool() const { return static_cast<bool>(evaluator_); }

 private:
  std::string description_;
  std::shared_ptr<const Evaluator> evaluator_;
};

/// Compiles an expression tree into a field evaluated with second-order
/// forward-mode duals. Domain errors are reported per point through
/// FieldEval::domain_error, never at compile time.
ScalarField compile_field(const Expression& expr);

/// Convenience: parse_expression + compile_field.
ScalarField compile_field(std::string_view source);

enum class Boundedness { Bounded, Unbounded, Unknown };

const char* to_string(Boundedness b);

/// Maps a parameter in [t_min, t_max] to a point of the desired path. Used by
/// tests and by distance-to-path estimates; not needed to build the field.
struct PathParametrization {
  std::function<Vec3(double)> point;
  double t_min = 0.0;
  double t_max = 1.0;
  bool closed = false;
};

/// Desired path P = { xi : phi1(xi) = 0, phi2(xi) = 0 }.
struct ImplicitPath {
  std::string name;
  ScalarField phi1;
  ScalarField phi2;
  Boundedness boundedness = Boundedness::Unknown;
  std::optional<PathParametrization> parametrization;
};

/// Intersection of the cylinders (x-a)^2 + (z-b)^2 = r^2 and y^2 + z^2 = R^2.
/// Throws std::invalid_argument for a non-positive radius.
ImplicitPath builtin_cylinder_intersection(double a, double b, double R, double r);

/// Helix phi1 = x - cos z, phi2 = y - sin z.
ImplicitPath builtin_helix();

/// Straight line along the x axis: phi1 = y, phi2 = z.
ImplicitPath builtin_line();

/// Path from two expression sources; throws ParseError on bad input.
ImplicitPath expression_path(std::string_view phi1, std::string_view phi2,
                             Boundedness hint = Boundedness::Unknown);

}  // namespace gvf3d

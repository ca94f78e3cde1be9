#include "gvf3d/implicit_path.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gvf3d/dual.hpp"

namespace gvf3d {

FieldEval FieldEval::invalid() {
  const double nan = std::nan("");
  FieldEval f;
  f.value = nan;
  f.gradient.setConstant(nan);
  f.hessian.setConstant(nan);
  f.domain_error = true;
  return f;
}

ScalarField::ScalarField(std::string description, Evaluator evaluator)
    : description_(std::move(description)), evaluator_(std::make_shared<const Evaluator>(std::move(evaluator))) {}

namespace {

// Postfix program produced from an expression tree.
struct Instruction {
  enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Call };
  Op op;
  double constant = 0.0;
  int arg = 0;  // variable index, exponent, or function id
};

struct Program {
  std::vector<Instruction> code;
  std::size_t max_depth = 0;
};

void emit(const Expression& e, Program& p, std::size_t& depth) {
  using K = Expression::Kind;
  using Op = Instruction::Op;
  auto push = [&](Instruction ins) {
    p.code.push_back(ins);
  };
  switch (e.kind) {
    case K::Number:
      push({Op::Const, e.number, 0});
      ++depth;
      break;
    case K::Variable:
      push({Op::Var, 0.0, e.variable});
      ++depth;
      break;
    case K::Neg:
      emit(e.children[0], p, depth);
      push({Op::Neg});
      break;
    case K::Pow:
      emit(e.children[0], p, depth);
      push({Op::Pow, 0.0, e.exponent});
      break;
    case K::Call:
      emit(e.children[0], p, depth);
      push({Op::Call, 0.0, static_cast<int>(e.function)});
      break;
    case K::Add:
    case K::Sub:
    case K::Mul:
    case K::Div: {
      emit(e.children[0], p, depth);
      emit(e.children[1], p, depth);
      const Op op = e.kind == K::Add ? Op::Add : e.kind == K::Sub ? Op::Sub : e.kind == K::Mul ? Op::Mul : Op::Div;
      push({op});
      --depth;
      break;
    }
  }
  p.max_depth = std::max(p.max_depth, depth);
}

Dual2 run(const Program& p, const Vec3& xi) {
  using Op = Instruction::Op;
  std::vector<Dual2> stack;
  stack.reserve(p.max_depth);
  for (const Instruction& ins : p.code) {
    switch (ins.op) {
      case Op::Const: stack.push_back(Dual2::constant(ins.constant)); break;
      case Op::Var: stack.push_back(Dual2::variable(xi[ins.arg], ins.arg)); break;
      case Op::Neg: stack.back() = -stack.back(); break;
      case Op::Pow: stack.back() = pow(stack.back(), ins.arg); break;
      case Op::Call: {
        Dual2& u = stack.back();
        switch (static_cast<Expression::Function>(ins.arg)) {
          case Expression::Function::Sin: u = sin(u); break;
          case Expression::Function::Cos: u = cos(u); break;
          case Expression::Function::Tan: u = tan(u); break;
          case Expression::Function::Exp: u = exp(u); break;
          case Expression::Function::Ln: u = log(u); break;
          case Expression::Function::Sqrt: u = sqrt(u); break;
        }
        break;
      }
      default: {
        const Dual2 rhs = stack.back();
        stack.pop_back();
        Dual2& lhs = stack.back();
        if (ins.op == Op::Add) lhs = lhs + rhs;
        else if (ins.op == Op::Sub) lhs = lhs - rhs;
        else if (ins.op == Op::Mul) lhs = lhs * rhs;
        else lhs = lhs / rhs;
      }
    }
  }
  return stack.back();
}

FieldEval to_eval(const Dual2& d) {
  if (!d.is_finite()) return FieldEval::invalid();
  FieldEval f;
  f.value = d.value;
  f.gradient = Vec3(d.grad[0], d.grad[1], d.grad[2]);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f.hessian(i, j) = d.h(i, j);
  return f;
}

FieldEval make_eval(double v, const Vec3& g, const Mat3& h) {
  FieldEval f;
  f.value = v;
  f.gradient = g;
  f.hessian = h;
  return f;
}

}  // namespace

ScalarField compile_field(const Expression& expr) {
  auto program = std::make_shared<Program>();
  std::size_t depth = 0;
  emit(expr, *program, depth);
  return ScalarField(to_string(expr), [program](const Vec3& xi) { return to_eval(run(*program, xi)); });
}

ScalarField compile_field(std::string_view source) { return compile_field(parse_expression(source)); }

const char* to_string(Boundedness b) {
  switch (b) {
    case Boundedness::Bounded: return "bounded";
    case Boundedness::Unbounded: return "unbounded";
    case Boundedness::Unknown: return "unknown";
  }
  return "unknown";
}

ImplicitPath builtin_cylinder_intersection(double a, double b, double R, double r) {
  if (!(R > 0.0) || !(r > 0.0)) throw std::invalid_argument("cylinder radii must be positive");

  ImplicitPath path;
  path.name = "cylinder_intersection";
  path.boundedness = Boundedness::Bounded;

  path.phi1 = ScalarField("(x - a)^2 + (z - b)^2 - r^2", [a, b, r](const Vec3& p) {
    const double dx = p.x() - a;
    const double dz = p.z() - b;
    Mat3 h = Mat3::Zero();
    h(0, 0) = 2.0;
    h(2, 2) = 2.0;
    return make_eval(dx * dx + dz * dz - r * r, Vec3(2.0 * dx, 0.0, 2.0 * dz), h);
  });
  path.phi2 = ScalarField("y^2 + z^2 - R^2", [R](const Vec3& p) {
    Mat3 h = Mat3::Zero();
    h(1, 1) = 2.0;
    h(2, 2) = 2.0;
    return make_eval(p.y() * p.y() + p.z() * p.z() - R * R, Vec3(0.0, 2.0 * p.y(), 2.0 * p.z()), h);
  });

  // The curve is a single closed loop when exactly one rim of the (x, z)
  // circle crosses the y-z cylinder. It is then traced as two arcs (y >= 0
  // and y <= 0) joined where z = +-R.
  const double top = b + r;
  const double bottom = b - r;
  const bool pokes_top = top > R && bottom > -R && bottom < R;
  const bool pokes_bottom = bottom < -R && top < R && top > -R;
  if (pokes_top || pokes_bottom) {
    double u_begin = 0.0;
    double u_end = 0.0;
    if (pokes_top) {
      const double u0 = std::asin((R - b) / r);
      u_begin = std::numbers::pi - u0;
      u_end = 2.0 * std::numbers::pi + u0;
    } else {
      const double u1 = std::asin((-R - b) / r);
      u_begin = u1;
      u_end = std::numbers::pi - u1;
    }
    PathParametrization param;
    param.t_min = 0.0;
    param.t_max = 2.0;
    param.closed = true;
    param.point = [=](double t) {
      double w = std::fmod(t, 2.0);
      if (w < 0) w += 2.0;
      const bool upper = w < 1.0;
      const double frac = upper ? w : 2.0 - w;
      const double u = u_begin + frac * (u_end - u_begin);
      const double z = b + r * std::sin(u);
      const double y = std::sqrt(std::max(0.0, R * R - z * z));
      return Vec3(a + r * std::cos(u), upper ? y : -y, z);
    };
    path.parametrization = std::move(param);
  }
  return path;
}

ImplicitPath builtin_helix() {
  ImplicitPath path;
  path.name = "helix";
  path.boundedness = Boundedness::Unbounded;
  path.phi1 = ScalarField("x - cos(z)", [](const Vec3& p) {
    const double s = std::sin(p.z());
    const double c = std::cos(p.z());
    Mat3 h = Mat3::Zero();
    h(2, 2) = c;
    return make_eval(p.x() - c, Vec3(1.0, 0.0, s), h);
  });
  path.phi2 = ScalarField("y - sin(z)", [](const Vec3& p) {
    const double s = std::sin(p.z());
    const double c = std::cos(p.z());
    Mat3 h = Mat3::Zero();
    h(2, 2) = s;
    return make_eval(p.y() - s, Vec3(0.0, 1.0, -c), h);
  });
  PathParametrization param;
  param.t_min = -20.0;
  param.t_max = 20.0;
  param.point = [](double t) { return Vec3(std::cos(t), std::sin(t), t); };
  path.parametrization = std::move(param);
  return path;
}

ImplicitPath builtin_line() {
  ImplicitPath path;
  path.name = "line";
  path.boundedness = Boundedness::Unbounded;
  path.phi1 = ScalarField("y", [](const Vec3& p) { return make_eval(p.y(), Vec3(0.0, 1.0, 0.0), Mat3::Zero()); });
  path.phi2 = ScalarField("z", [](const Vec3& p) { return make_eval(p.z(), Vec3(0.0, 0.0, 1.0), Mat3::Zero()); });
  PathParametrization param;
  param.t_min = -20.0;
  param.t_max = 20.0;
  param.point = [](double t) { return Vec3(t, 0.0, 0.0); };
  path.parametrization = std::move(param);
  return path;
}

ImplicitPath expression_path(std::string_view phi1, std::string_view phi2, Boundedness hint) {
  ImplicitPath path;
  path.name = "expression";
  path.phi1 = compile_field(phi1);
  path.phi2 = compile_field(phi2);
  path.boundedness = hint;
  return path;
}

}  // namespace gvf3d

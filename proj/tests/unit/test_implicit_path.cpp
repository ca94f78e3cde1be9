#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "gvf3d/expression.hpp"
#include "gvf3d/implicit_path.hpp"

using namespace gvf3d;
using E = Expression;

namespace {

Vec3 random_point(std::mt19937_64& rng, double lo = -5.0, double hi = 5.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Vec3(u(rng), u(rng), u(rng));
}

// Central differences of the value (gradient) and of the value again
// (second differences, Hessian). Independent of the dual-number code path.
Vec3 fd_gradient(const ScalarField& f, const Vec3& p, double h) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 a = p, b = p;
    a[i] += h;
    b[i] -= h;
    g[i] = (f.value(a) - f.value(b)) / (2 * h);
  }
  return g;
}

Mat3 fd_hessian(const ScalarField& f, const Vec3& p, double h) {
  Mat3 H;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Vec3 pp = p, pm = p, mp = p, mm = p;
      pp[i] += h, pp[j] += h;
      pm[i] += h, pm[j] -= h;
      mp[i] -= h, mp[j] += h;
      mm[i] -= h, mm[j] -= h;
      H(i, j) = (f.value(pp) - f.value(pm) - f.value(mp) + f.value(mm)) / (4 * h * h);
    }
  return H;
}

}  // namespace

TEST(Parser, HelixSurface) {
  const E expected = E::binary(E::Kind::Sub, E::var(0), E::call(E::Function::Cos, E::var(2)));
  EXPECT_EQ(parse_expression("x - cos(z)"), expected);
}

TEST(Parser, SingleVariable) { EXPECT_EQ(parse_expression("x"), E::var(0)); }

TEST(Parser, IncompleteInputReportsOffset) {
  try {
    parse_expression("x +");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.reason(), ParseError::Reason::Syntax);
    EXPECT_EQ(e.offset(), 3u);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(Parser, Precedence) {
  // 1 + 2 * x^2 groups as 1 + (2 * (x^2))
  const E e = parse_expression("1 + 2 * x^2");
  ASSERT_EQ(e.kind, E::Kind::Add);
  ASSERT_EQ(e.children[1].kind, E::Kind::Mul);
  EXPECT_EQ(e.children[1].children[1], E::power(E::var(0), 2));
  // Left associativity of - and /
  EXPECT_EQ(parse_expression("x - y - z"),
            E::binary(E::Kind::Sub, E::binary(E::Kind::Sub, E::var(0), E::var(1)), E::var(2)));
  EXPECT_EQ(parse_expression("x / y / z"),
            E::binary(E::Kind::Div, E::binary(E::Kind::Div, E::var(0), E::var(1)), E::var(2)));
}

TEST(Parser, WhitespaceAndNumbers) {
  EXPECT_EQ(parse_expression("  2.5e-1*x "), E::binary(E::Kind::Mul, E::literal(0.25), E::var(0)));
  EXPECT_EQ(parse_expression("-x^2"), E::unary(E::Kind::Neg, E::power(E::var(0), 2)));
}

TEST(Parser, RejectsNonSmoothConstructs) {
  for (const char* src : {"abs(x)", "min(x, y)", "max(x,y)", "sign(x)", "floor(z)", "x^0.5", "x^-1"}) {
    try {
      parse_expression(src);
      FAIL() << src;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.reason(), ParseError::Reason::NonSmooth) << src;
    }
  }
}

TEST(Parser, RejectsUnknownIdentifier) {
  try {
    parse_expression("x + w");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.reason(), ParseError::Reason::UnknownIdentifier);
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Parser, SyntaxErrors) {
  for (const char* src : {"", "(", "x)", "sin x", "x ^", "--x", "x y", "2 3"}) {
    EXPECT_THROW(parse_expression(src), ParseError) << src;
  }
}

TEST(Parser, RoundTripOnRandomSources) {
  std::mt19937_64 rng(7);
  std::function<std::string(int)> gen = [&](int depth) -> std::string {
    std::uniform_int_distribution<int> pick(0, depth > 3 ? 2 : 8);
    switch (pick(rng)) {
      case 0: return std::string(1, "xyz"[rng() % 3]);
      case 1: return std::to_string(static_cast<int>(rng() % 10));
      case 2: return "0.125";
      case 3: return gen(depth + 1) + " + " + gen(depth + 1);
      case 4: return gen(depth + 1) + " - " + gen(depth + 1);
      case 5: return gen(depth + 1) + " * " + gen(depth + 1);
      case 6: return "(" + gen(depth + 1) + ") / (" + gen(depth + 1) + ")";
      case 7: return std::string("-") + "(" + gen(depth + 1) + ")^" + std::to_string(rng() % 4);
      default: {
        const char* f[] = {"sin", "cos", "tan", "exp", "ln", "sqrt"};
        return std::string(f[rng() % 6]) + "(" + gen(depth + 1) + ")";
      }
    }
  };
  for (int i = 0; i < 500; ++i) {
    const std::string src = gen(0);
    const E tree = parse_expression(src);
    const std::string printed = to_string(tree);
    EXPECT_EQ(parse_expression(printed), tree) << src << " -> " << printed;
  }
}

TEST(CompiledField, HelixSurfaceDerivatives) {
  const FieldEval f = compile_field("x - cos(z)")(Vec3(1, 0, 0));
  EXPECT_DOUBLE_EQ(f.value, 0.0);
  EXPECT_TRUE(f.gradient.isApprox(Vec3(1, 0, 0)));
  Mat3 H = Mat3::Zero();
  H(2, 2) = 1.0;
  EXPECT_TRUE((f.hessian - H).cwiseAbs().maxCoeff() < 1e-15);
}

TEST(CompiledField, LinearField) {
  const ScalarField f = compile_field("x");
  const FieldEval r = f(Vec3(3.5, -1, 2));
  EXPECT_DOUBLE_EQ(r.value, 3.5);
  EXPECT_EQ(r.gradient, Vec3(1, 0, 0));
  EXPECT_EQ(r.hessian, Mat3::Zero());
}

TEST(CompiledField, CylinderSurface) {
  const FieldEval r = compile_field("y^2 + z^2 - 4")(Vec3(0, 2, 0));
  EXPECT_DOUBLE_EQ(r.value, 0.0);
  EXPECT_EQ(r.gradient, Vec3(0, 4, 0));
}

TEST(CompiledField, DomainErrorIsFlaggedPerPoint) {
  const ScalarField f = compile_field("sqrt(x) + ln(y)");
  EXPECT_FALSE(f(Vec3(1, 1, 0)).domain_error);
  const FieldEval bad = f(Vec3(-1, 1, 0));
  EXPECT_TRUE(bad.domain_error);
  EXPECT_TRUE(std::isnan(bad.value));
  EXPECT_TRUE(f(Vec3(1, 0, 0)).domain_error);
}

TEST(CompiledField, MatchesFiniteDifferences) {
  const char* sources[] = {"x - cos(z)",
                           "y - sin(z)",
                           "(x - 0)^2 + (z - 1.5)^2 - 1",
                           "y^2 + z^2 - 4",
                           "x*y*z + exp(0.1*x) - tan(0.2*y)",
                           "sqrt(1 + x^2 + y^2) * cos(x*z)",
                           "ln(2 + sin(x*y)) / (3 + z^2)"};
  std::mt19937_64 rng(42);
  for (const char* src : sources) {
    const ScalarField f = compile_field(src);
    for (int i = 0; i < 100; ++i) {
      const Vec3 p = random_point(rng);
      const FieldEval r = f(p);
      ASSERT_FALSE(r.domain_error) << src;
      EXPECT_LT((r.gradient - fd_gradient(f, p, 1e-5)).cwiseAbs().maxCoeff(), 1e-6) << src;
      EXPECT_LT((r.hessian - fd_hessian(f, p, 1e-4)).cwiseAbs().maxCoeff(), 1e-4) << src;
      EXPECT_LE((r.hessian - r.hessian.transpose()).cwiseAbs().maxCoeff(),
                1e-12 * std::max(1.0, r.hessian.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Builtins, CylinderIntersection) {
  const ImplicitPath p = builtin_cylinder_intersection(0, 1.5, 2, 1);
  EXPECT_EQ(p.boundedness, Boundedness::Bounded);
  EXPECT_DOUBLE_EQ(p.phi1.value(Vec3(1, 0, 1.5)), 0.0);
  EXPECT_DOUBLE_EQ(p.phi2.value(Vec3(0, 2, 0)), 0.0);
  const Vec3 xi(1.8, 1, 2);
  EXPECT_NEAR(p.phi1.value(xi), 2.49, 1e-12);
  EXPECT_NEAR(p.phi2.value(xi), 1.0, 1e-12);
  const Vec3 q(0.3, -0.7, 2.2);
  EXPECT_TRUE(p.phi1(q).gradient.isApprox(Vec3(2 * 0.3, 0, 2 * (2.2 - 1.5))));
}

TEST(Builtins, CylinderRejectsBadRadius) {
  EXPECT_THROW(builtin_cylinder_intersection(0, 1.5, 0, 1), std::invalid_argument);
  EXPECT_THROW(builtin_cylinder_intersection(0, 1.5, 2, -1), std::invalid_argument);
}

TEST(Builtins, Helix) {
  const ImplicitPath p = builtin_helix();
  EXPECT_EQ(p.boundedness, Boundedness::Unbounded);
  EXPECT_TRUE(p.phi1(Vec3(0, 0, std::numbers::pi / 2)).gradient.isApprox(Vec3(1, 0, 1)));
  EXPECT_TRUE(p.phi2(Vec3(0, 0, 0)).gradient.isApprox(Vec3(0, 1, -1)));
  const Vec3 on(std::cos(5.0), std::sin(5.0), 5.0);
  EXPECT_NEAR(p.phi1.value(on), 0.0, 1e-15);
  EXPECT_NEAR(p.phi2.value(on), 0.0, 1e-15);
}

TEST(Builtins, ParametrizationsLieOnPath) {
  for (const ImplicitPath& p : {builtin_cylinder_intersection(0, 1.5, 2, 1), builtin_helix(), builtin_line()}) {
    ASSERT_TRUE(p.parametrization.has_value()) << p.name;
    const auto& pp = *p.parametrization;
    for (int i = 0; i <= 1000; ++i) {
      const Vec3 q = pp.point(pp.t_min + (pp.t_max - pp.t_min) * i / 1000.0);
      EXPECT_LT(std::abs(p.phi1.value(q)), 1e-9) << p.name;
      EXPECT_LT(std::abs(p.phi2.value(q)), 1e-9) << p.name;
    }
  }
}

TEST(Builtins, CylinderParametrizationIsContinuousLoop) {
  const ImplicitPath p = builtin_cylinder_intersection(0, 1.5, 2, 1);
  const auto& pp = *p.parametrization;
  EXPECT_TRUE(pp.closed);
  auto max_jump = [&](int n) {
    Vec3 prev = pp.point(pp.t_min);
    double jump = 0.0;
    for (int i = 1; i <= n; ++i) {
      const Vec3 q = pp.point(pp.t_min + (pp.t_max - pp.t_min) * i / n);
      jump = std::max(jump, (q - prev).norm());
      prev = q;
    }
    EXPECT_LT((prev - pp.point(pp.t_min)).norm(), 1e-9);
    return jump;
  };
  // speed has a square-root blow-up where the loop crosses y = 0 at z = 2
  const double coarse = max_jump(4000), fine = max_jump(64000);
  EXPECT_LT(coarse, 0.1);
  EXPECT_LT(fine, 0.3 * coarse);
}

TEST(Builtins, AnalyticMatchesCompiled) {
  struct Case {
    ImplicitPath builtin;
    const char* phi1;
    const char* phi2;
  };
  const Case cases[] = {
      {builtin_cylinder_intersection(0.5, 1.5, 2, 1), "(x - 0.5)^2 + (z - 1.5)^2 - 1", "y^2 + z^2 - 4"},
      {builtin_helix(), "x - cos(z)", "y - sin(z)"},
      {builtin_line(), "y", "z"},
  };
  std::mt19937_64 rng(3);
  for (const Case& c : cases) {
    const ImplicitPath ad = expression_path(c.phi1, c.phi2);
    for (int i = 0; i < 100; ++i) {
      const Vec3 p = random_point(rng);
      for (int k = 0; k < 2; ++k) {
        const FieldEval a = (k == 0 ? c.builtin.phi1 : c.builtin.phi2)(p);
        const FieldEval b = (k == 0 ? ad.phi1 : ad.phi2)(p);
        EXPECT_NEAR(a.value, b.value, 1e-12);
        EXPECT_LT((a.gradient - b.gradient).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((a.hessian - b.hessian).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(ExpressionPath, ForwardsParseErrors) {
  EXPECT_THROW(expression_path("x", "abs(y)"), ParseError);
  const ImplicitPath p = expression_path("x - cos(z)", "y - sin(z)", Boundedness::Unbounded);
  EXPECT_EQ(p.boundedness, Boundedness::Unbounded);
  EXPECT_FALSE(p.parametrization.has_value());
}

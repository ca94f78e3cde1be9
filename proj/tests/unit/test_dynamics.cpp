#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "gvf3d/dynamics.hpp"

using namespace gvf3d;

namespace {

constexpr double kPi = std::numbers::pi;

IntegratorConfig rk4(double dt, int record_every = 1) {
  IntegratorConfig c;
  c.dt = dt;
  c.record_every = record_every;
  return c;
}

ImplicitPath x_axis() { return expression_path("y", "z"); }

AircraftParams unit_aircraft() { return AircraftParams{}; }

double beta_closed_form(double beta0, double k_theta, double t) {
  return 2.0 * std::atan(std::tan(beta0 / 2.0) * std::exp(-k_theta * t));
}

}  // namespace

TEST(Disturbance, Kinds) {
  EXPECT_EQ(Disturbance::zero()(3.0), Vec3::Zero());
  EXPECT_EQ(Disturbance::constant(Vec3(1, 2, 2))(7.0), Vec3(1, 2, 2));
  EXPECT_DOUBLE_EQ(Disturbance::constant(Vec3(1, 2, 2)).sup_norm(), 3.0);
  const Disturbance s = Disturbance::sinusoid(Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(0.5, 0, 0));
  EXPECT_DOUBLE_EQ(s(1.0).x(), std::sin(2.5));
  EXPECT_DOUBLE_EQ(s.sup_norm(), 1.0);
  const Disturbance d = Disturbance::decaying(Vec3(0, 0.1, 0), 2.0);
  EXPECT_DOUBLE_EQ(d(1.0).y(), 0.1 * std::exp(-2.0));
  EXPECT_DOUBLE_EQ(d.sup_norm(), 0.1);
  EXPECT_THROW(Disturbance::decaying(Vec3(1, 0, 0), 0.0), std::invalid_argument);
  EXPECT_STREQ(to_string(Disturbance::Kind::Sinusoid), "sinusoid");
}

TEST(WrapAngle, Range) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(0.5 + 2 * kPi), 0.5, 1e-12);
  EXPECT_NEAR(wrap_angle(-0.5 - 4 * kPi), -0.5, 1e-12);
}

TEST(IntegratorConfig, Validation) {
  IntegratorConfig c;
  c.dt = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = IntegratorConfig{};
  c.rtol = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(RawFlow, HelixPathIsInvariant) {
  const Trajectory tr = integrate_flow(builtin_helix(), FieldParams(1, 1), Vec3(1, 0, 0), rk4(1e-3), 10.0);
  ASSERT_TRUE(tr.completed());
  for (const auto& s : tr.samples) EXPECT_LT(s.e_norm, 1e-6);
}

TEST(RawFlow, HelixConverges) {
  const Trajectory tr = integrate_flow(builtin_helix(), FieldParams(1, 1), Vec3(2, 0, 0), rk4(1e-3), 20.0);
  ASSERT_TRUE(tr.completed());
  EXPECT_LT(tr.final_error(), 1e-3);
  double integral = 0.0;
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const auto &a = tr.samples[i - 1], &b = tr.samples[i];
    EXPECT_LE(b.V, a.V + 1e-12);
    integral += 0.5 * (b.t - a.t) * (a.nke_norm * a.nke_norm + b.nke_norm * b.nke_norm);
  }
  // V(T) - V(0) = -int |NKe|^2 dt
  EXPECT_NEAR(tr.samples.back().V - tr.samples.front().V, -integral, 1e-6);
}

TEST(RawFlow, Rk45AgreesWithRk4) {
  IntegratorConfig adaptive;
  adaptive.method = IntegratorMethod::Rk45;
  const Trajectory a = integrate_flow(builtin_helix(), FieldParams(1, 1), Vec3(2, 0, 0), adaptive, 5.0);
  const Trajectory b = integrate_flow(builtin_helix(), FieldParams(1, 1), Vec3(2, 0, 0), rk4(1e-3), 5.0);
  ASSERT_TRUE(a.completed());
  EXPECT_DOUBLE_EQ(a.samples.back().t, 5.0);
  EXPECT_LT((a.samples.back().position - b.samples.back().position).norm(), 1e-7);
  EXPECT_LT(a.samples.size(), b.samples.size());
}

TEST(RawFlow, RecordEvery) {
  const Trajectory tr = integrate_flow(builtin_helix(), FieldParams(1, 1), Vec3(2, 0, 0), rk4(1e-3, 10), 1.0);
  EXPECT_EQ(tr.samples.size(), 101u);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) EXPECT_GT(tr.samples[i].t, tr.samples[i - 1].t);
  EXPECT_DOUBLE_EQ(tr.samples.back().t, 1.0);
}

TEST(RawFlow, Rk4FourthOrder) {
  const ImplicitPath helix = builtin_helix();
  IntegratorConfig ref;
  ref.method = IntegratorMethod::Rk45;
  ref.rtol = ref.atol = 1e-13;
  const Vec3 exact = integrate_flow(helix, FieldParams(1, 1), Vec3(2, 0, 0), ref, 2.0).samples.back().position;
  double prev = 0.0;
  for (double dt : {0.1, 0.05, 0.025}) {
    const double err =
        (integrate_flow(helix, FieldParams(1, 1), Vec3(2, 0, 0), rk4(dt), 2.0).samples.back().position - exact).norm();
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 16.0 * 0.7);
      EXPECT_LT(prev / err, 16.0 * 1.3);
    }
    prev = err;
  }
}

TEST(RawFlow, ExtendsToLongHorizon) {
  const Vec3 xi0(1.5, 0, 0);
  const Trajectory tr = integrate_flow(builtin_helix(), FieldParams(1, 1), xi0, rk4(1e-2, 10), 1000.0);
  ASSERT_TRUE(tr.completed());
  EXPECT_FALSE(tr.has_event(EventKind::StepUnderflow));
  double integral = 0.0, at_100 = -1.0;
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const auto &a = tr.samples[i - 1], &b = tr.samples[i];
    ASSERT_TRUE(b.position.allFinite());
    // |chi| is at most sqrt(2) + |NKe| <= 2 from this start.
    EXPECT_LE((b.position - xi0).norm(), 2.0 * b.t);
    integral += 0.5 * (b.t - a.t) * (a.nke_norm * a.nke_norm + b.nke_norm * b.nke_norm);
    if (at_100 < 0.0 && b.t >= 100.0) at_100 = integral;
  }
  EXPECT_LT(integral - at_100, 1e-6);
  EXPECT_GT(integral, 0.0);
}

TEST(RawFlow, DomainExit) {
  // e1 = sqrt(x) + 1 > 0 pushes x to zero and past it.
  const ImplicitPath p = expression_path("sqrt(x) + 1", "y");
  const Trajectory tr = integrate_flow(p, FieldParams(1, 1), Vec3(1, 0, 0), rk4(1e-3), 5.0);
  EXPECT_EQ(tr.termination().kind, EventKind::DomainExit);
  EXPECT_GT(tr.samples.back().position.x(), 0.0);
}

TEST(RawFlow, ApproachesCylinderSingularPoint) {
  const ImplicitPath cyl = builtin_cylinder_intersection(0, 1.5, 2, 1);
  const Trajectory tr = integrate_flow(cyl, FieldParams(2, 2), Vec3(0, 0, 2.0563), rk4(1e-3), 10.0);
  EXPECT_EQ(tr.termination().kind, EventKind::SingularApproach);
  EXPECT_LT(std::abs(tr.samples.back().position.z() - 2.0462880362), 1e-8);
}

TEST(RawFlow, RejectsBadInput) {
  EXPECT_THROW(integrate_flow(builtin_helix(), FieldParams(1, 1), Vec3(2, 0, 0), rk4(1e-3), 0.0),
               std::invalid_argument);
  EXPECT_THROW(integrate_flow(builtin_helix(), FieldParams(1, 1), Vec3(NAN, 0, 0), rk4(1e-3), 1.0),
               std::invalid_argument);
}

TEST(NormalizedFlow, UnitSpeed) {
  const double T = 10.0;
  const Trajectory tr = integrate_normalized_flow(builtin_helix(), FieldParams(1, 1), Vec3(2, 0, 0), rk4(1e-3), T);
  ASSERT_TRUE(tr.completed());
  double arc = 0.0;
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    EXPECT_NEAR(tr.samples[i].speed, 1.0, 1e-9);
    if (i == 0) continue;
    const double step = (tr.samples[i].position - tr.samples[i - 1].position).norm();
    EXPECT_LE(step, tr.samples[i].t - tr.samples[i - 1].t + 1e-12);
    arc += step;
  }
  EXPECT_NEAR(arc, T, 1e-3);
}

TEST(NormalizedFlow, HaltsNearSingularPoint) {
  const ImplicitPath cyl = builtin_cylinder_intersection(0, 1.5, 2, 1);
  const Trajectory tr = integrate_normalized_flow(cyl, FieldParams(2, 2), Vec3(0, 0, 2.0563), rk4(1e-3), 10.0);
  EXPECT_EQ(tr.termination().kind, EventKind::SingularApproach);
  EXPECT_LT(tr.termination().t, 1.0);
  EXPECT_LT(tr.samples.back().chi_norm, 1e-3);
}

TEST(PerturbedFlow, ZeroDisturbanceMatchesRawFlow) {
  const auto cfg = rk4(1e-3);
  const Trajectory a = integrate_flow(builtin_helix(), FieldParams(1, 1), Vec3(2, 0, 0), cfg, 5.0);
  const Trajectory b =
      integrate_perturbed_flow(builtin_helix(), FieldParams(1, 1), Vec3(2, 0, 0), Disturbance::zero(), cfg, 5.0);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].t, b.samples[i].t);
    EXPECT_EQ(a.samples[i].position, b.samples[i].position);
  }
  EXPECT_EQ(b.system, SystemKind::Perturbed);
}

TEST(PerturbedFlow, ErrorDerivativeMatchesProjection) {
  const Disturbance d = Disturbance::sinusoid(Vec3(0.1, 0.05, 0), Vec3(1, 2, 0), Vec3(0, 0, 0));
  const ImplicitPath helix = builtin_helix();
  const Trajectory tr = integrate_perturbed_flow(helix, FieldParams(1, 1), Vec3(1.5, 0.2, 0), d, rk4(1e-3), 3.0);
  ASSERT_TRUE(tr.completed());
  for (std::size_t i = 1; i + 1 < tr.samples.size(); i += 97) {
    const auto& s = tr.samples[i];
    const FieldSample f = sample_field(helix, FieldParams(1, 1), s.position);
    EXPECT_LT((s.edot - f.N.transpose() * (f.chi + d(s.t))).norm(), 1e-12);
    const Vec2 fd = (tr.samples[i + 1].e - tr.samples[i - 1].e) / (tr.samples[i + 1].t - tr.samples[i - 1].t);
    EXPECT_LT((s.edot - fd).norm(), 1e-5);
  }
}

TEST(PerturbedFlow, DecayingDisturbanceVanishes) {
  const Trajectory tr = integrate_perturbed_flow(builtin_helix(), FieldParams(1, 1), Vec3(1.1, 0, 0),
                                                 Disturbance::decaying(Vec3(0.1, 0, 0), 1.0), rk4(1e-3), 30.0);
  ASSERT_TRUE(tr.completed());
  EXPECT_LT(tr.final_error(), 1e-3);
}

TEST(PerturbedFlow, LargerConstantDisturbanceLargerBound) {
  auto bound = [](double a) {
    const Trajectory tr = integrate_perturbed_flow(builtin_helix(), FieldParams(1, 1), Vec3(1.1, 0, 0),
                                                   Disturbance::constant(Vec3(a, 0, 0)), rk4(1e-3, 10), 30.0);
    double b = 0.0;
    for (const auto& s : tr.samples)
      if (s.t >= 24.0) b = std::max(b, s.e_norm);
    return b;
  };
  const double b5 = bound(0.05), b10 = bound(0.1);
  EXPECT_LT(b5, 0.1);
  EXPECT_GT(b10, b5);
}

TEST(Controller, AlignedGivesNoCorrection) {
  const AircraftControls c = aircraft_controller(AircraftState{0, 0, 0, 0, 1}, x_axis(), FieldParams(1, 1),
                                                 unit_aircraft());
  ASSERT_EQ(c.status, RhsStatus::Ok);
  EXPECT_NEAR(c.beta, 0.0, 1e-15);
  EXPECT_NEAR(c.theta_d_dot, 0.0, 1e-15);
  EXPECT_NEAR(c.theta_u, 0.0, 1e-15);
  EXPECT_EQ(c.s_u, 1.0);
}

TEST(Controller, CruiseSpeedCommand) {
  AircraftParams ac;
  ac.s_star = 17.5;
  for (double th : {-2.0, 0.3, 1.7}) {
    const AircraftControls c =
        aircraft_controller(AircraftState{0.3, -0.2, 0.5, th, 4.0}, x_axis(), FieldParams(1, 1), ac);
    EXPECT_EQ(c.s_u, 17.5);
  }
}

TEST(Controller, BetaSign) {
  // heading rotated counterclockwise from the field direction gives positive beta.
  const AircraftControls c =
      aircraft_controller(AircraftState{0, 0, 0, 0.4, 1}, x_axis(), FieldParams(1, 1), unit_aircraft());
  EXPECT_NEAR(c.beta, 0.4, 1e-12);
}

TEST(Controller, ScenarioOneInitialStateIsFinite) {
  const AircraftControls c = aircraft_controller(AircraftState{1.8, 1, 2, kPi / 4, 0},
                                                 builtin_cylinder_intersection(0, 1.5, 2, 1), FieldParams(2, 2),
                                                 unit_aircraft());
  ASSERT_EQ(c.status, RhsStatus::Ok);
  EXPECT_TRUE(std::isfinite(c.theta_u));
  EXPECT_TRUE(std::isfinite(c.z_u));
  EXPECT_TRUE(std::isfinite(c.theta_d_dot));
  EXPECT_TRUE(c.velocity.allFinite());
}

TEST(Controller, PlanarDegeneracy) {
  // path along z: the field is vertical on the path.
  const ImplicitPath z_axis = expression_path("x", "y");
  const AircraftControls c =
      aircraft_controller(AircraftState{0, 0, 1, 0, 1}, z_axis, FieldParams(1, 1), unit_aircraft());
  EXPECT_EQ(c.status, RhsStatus::PlanarDegeneracy);
  const Trajectory tr = integrate_aircraft(z_axis, FieldParams(1, 1), unit_aircraft(), AircraftState{0, 0, 1, 0, 1},
                                           rk4(1e-3), 1.0);
  EXPECT_EQ(tr.termination().kind, EventKind::PlanarDegeneracy);
}

TEST(Aircraft, BetaFollowsClosedForm) {
  for (double k_theta : {1.0, 0.5})
    for (double beta0 : {0.5, -0.5, 2.5, -2.5}) {
      AircraftParams ac;
      ac.k_theta = k_theta;
      const Trajectory tr =
          integrate_aircraft(x_axis(), FieldParams(1, 1), ac, AircraftState{0, 0, 0, beta0, 1}, rk4(1e-3, 10), 10.0);
      ASSERT_TRUE(tr.completed());
      double sq = 0.0;
      for (const auto& s : tr.samples) sq += std::pow(s.beta - beta_closed_form(beta0, k_theta, s.t), 2);
      EXPECT_LT(std::sqrt(sq / tr.samples.size()), 1e-4) << beta0;
    }
}

TEST(Aircraft, BetaZeroIsEquilibrium) {
  const Trajectory tr = integrate_aircraft(x_axis(), FieldParams(1, 1), unit_aircraft(), AircraftState{0, 0, 0, 0, 1},
                                           rk4(1e-3), 10.0);
  for (const auto& s : tr.samples) EXPECT_LT(std::abs(s.beta), 1e-9);
}

TEST(Aircraft, BetaPiIsFlagged) {
  const Trajectory tr = integrate_aircraft(x_axis(), FieldParams(1, 1), unit_aircraft(),
                                           AircraftState{0, 0, 0, kPi, 1}, rk4(1e-3), 10.0);
  EXPECT_TRUE(tr.has_event(EventKind::UnstableEquilibrium));
  EXPECT_TRUE(tr.completed());
  for (const auto& s : tr.samples) EXPECT_NEAR(std::abs(s.beta), kPi, 1e-9);
}

TEST(Aircraft, ScenarioTwoConverges) {
  AircraftState s0{0.1, 0, -5, kPi, 0};
  const Trajectory tr =
      integrate_aircraft(builtin_helix(), FieldParams(1, 1), unit_aircraft(), s0, rk4(1e-3, 10), 60.0);
  ASSERT_TRUE(tr.completed());
  EXPECT_LT(tr.final_error(), 0.05);
  for (const auto& s : tr.samples) {
    EXPECT_GE(s.airspeed, 0.0);
    EXPECT_GT(s.theta, -kPi);
    EXPECT_LE(s.theta, kPi);
  }
}

TEST(Aircraft, RejectsBadParams) {
  AircraftParams ac;
  ac.tau_z = 0;
  EXPECT_THROW(ac.validate(), std::invalid_argument);
  EXPECT_THROW(integrate_aircraft(builtin_helix(), FieldParams(1, 1), ac, AircraftState{}, rk4(1e-3), 1.0),
               std::invalid_argument);
}

TEST(Csv, RoundTripFlow) {
  const Trajectory tr = integrate_flow(builtin_helix(), FieldParams(1, 1), Vec3(2, 0, 0), rk4(1e-3, 50), 2.0);
  std::stringstream buf;
  write_csv(tr, buf);
  const Trajectory back = read_csv(buf);
  EXPECT_EQ(back.system, SystemKind::Raw);
  ASSERT_EQ(back.samples.size(), tr.samples.size());
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].t, tr.samples[i].t);
    EXPECT_EQ(back.samples[i].position, tr.samples[i].position);
    EXPECT_EQ(back.samples[i].e, tr.samples[i].e);
    EXPECT_EQ(back.samples[i].V, tr.samples[i].V);
  }
}

TEST(Csv, RoundTripAircraft) {
  const Trajectory tr = integrate_aircraft(builtin_helix(), FieldParams(1, 1), unit_aircraft(),
                                           AircraftState{0.1, 0, -5, 1.0, 0}, rk4(1e-3, 100), 5.0);
  std::stringstream buf;
  write_csv(tr, buf);
  EXPECT_EQ(buf.str().substr(0, buf.str().find('\n')), "t,x,y,z,theta,s,e1,e2,e_norm,V,nke_norm,beta");
  const Trajectory back = read_csv(buf);
  EXPECT_EQ(back.system, SystemKind::Aircraft);
  ASSERT_EQ(back.samples.size(), tr.samples.size());
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].theta, tr.samples[i].theta);
    EXPECT_EQ(back.samples[i].airspeed, tr.samples[i].airspeed);
    EXPECT_EQ(back.samples[i].beta, tr.samples[i].beta);
  }
}

TEST(Csv, RejectsMalformed) {
  std::stringstream empty("t,x,y,z,e1,e2,e_norm,V,nke_norm\n");
  try {
    read_csv(empty);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("no samples"), std::string::npos);
  }
  std::stringstream short_row("t,x,y,z,e1,e2,e_norm,V,nke_norm\n0,1,2\n");
  EXPECT_THROW(read_csv(short_row), std::runtime_error);
  std::stringstream backwards("t,x,y,z,e1,e2,e_norm,V,nke_norm\n1,0,0,0,0,0,0,0,0\n0,0,0,0,0,0,0,0,0\n");
  EXPECT_THROW(read_csv(backwards), std::runtime_error);
  std::stringstream bad_header("a,b\n1,2\n");
  EXPECT_THROW(read_csv(bad_header), std::runtime_error);
}

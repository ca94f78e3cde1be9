#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gvf3d/dynamics.hpp"
#include "internal.hpp"

namespace gvf3d {

void AircraftParams::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(tau_z) || !positive(tau_theta) || !positive(tau_s))
    throw std::invalid_argument("aircraft time constants must be positive");
  if (!positive(k_theta)) throw std::invalid_argument("k_theta must be positive");
  if (!positive(s_star)) throw std::invalid_argument("cruise speed s_star must be positive");
}

namespace {

AircraftControls controls_from_sample(const AircraftState& st, const FieldSample& sample, const AircraftParams& ac) {
  AircraftControls c;
  if (!sample.valid) {
    c.status = RhsStatus::DomainExit;
    return c;
  }
  if (!sample.chi_hat_defined) {
    c.status = RhsStatus::Singular;
    return c;
  }
  const Vec2 chi_p = sample.chi_hat.head<2>();
  const double chi_p_norm = chi_p.norm();
  if (!(chi_p_norm > kPlanarEpsilon)) {
    c.status = RhsStatus::PlanarDegeneracy;
    return c;
  }
  const Vec2 u = chi_p / chi_p_norm;
  const Vec2 heading(std::cos(st.theta), std::sin(st.theta));

  const double planar_chi = std::hypot(sample.chi.x(), sample.chi.y());
  c.z_u = st.z + ac.tau_z * st.s * sample.chi.z() / planar_chi;
  c.s_u = ac.s_star;
  c.velocity = Vec3(st.s * heading.x(), st.s * heading.y(), (c.z_u - st.z) / ac.tau_z);

  // E rotates by +pi/2: E w = (-w_y, w_x).
  const Vec2 w = jacobian_planar_field(sample) * c.velocity;
  const Vec2 Ew(-w.y(), w.x());
  c.theta_d_dot = -u.dot(Ew) / chi_p_norm;

  // h^T E u = sin(beta), beta measured from u to the heading.
  const double sin_beta = heading.y() * u.x() - heading.x() * u.y();
  c.beta = std::atan2(sin_beta, heading.dot(u));
  c.theta_u = ac.tau_theta * (c.theta_d_dot - ac.k_theta * sin_beta) + st.theta;
  return c;
}

class AircraftSystem {
 public:
  using State = Eigen::Matrix<double, 5, 1>;

  AircraftSystem(const ImplicitPath& path, const FieldParams& params, const AircraftParams& ac)
      : path_(path), params_(params), ac_(ac) {}

  static AircraftState unpack(const State& x) { return AircraftState{x[0], x[1], x[2], x[3], x[4]}; }

  RhsResult<5> rhs(double, const State& x) const {
    RhsResult<5> r;
    const AircraftState st = unpack(x);
    const AircraftControls c = controls_from_sample(st, sample_field(path_, params_, st.position()), ac_);
    r.status = c.status;
    if (c.status != RhsStatus::Ok) return r;
    r.value << st.s * std::cos(st.theta), st.s * std::sin(st.theta), (c.z_u - st.z) / ac_.tau_z,
        (c.theta_u - st.theta) / ac_.tau_theta, (c.s_u - st.s) / ac_.tau_s;
    if (!r.value.allFinite()) r.status = RhsStatus::DomainExit;
    return r;
  }

  double max_step(const State&) const { return std::numeric_limits<double>::infinity(); }

  void normalize(State& x) const { x[3] = wrap_angle(x[3]); }

  TrajectorySample observe(double t, const State& x) {
    TrajectorySample out;
    out.t = t;
    const AircraftState st = unpack(x);
    out.position = st.position();
    out.theta = st.theta;
    out.airspeed = st.s;
    const FieldSample s = sample_field(path_, params_, out.position);
    detail::fill_field_columns(out, s);
    out.edot.setConstant(std::numeric_limits<double>::quiet_NaN());
    const AircraftControls c = controls_from_sample(st, s, ac_);
    if (c.status == RhsStatus::Ok) {
      out.speed = c.velocity.norm();
      if (!have_beta_) {
        beta_ = c.beta;
        have_beta_ = true;
      } else {
        beta_ += wrap_angle(c.beta - wrap_angle(beta_));
      }
      out.beta = beta_;
    } else {
      out.beta = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
  }

 private:
  const ImplicitPath& path_;
  const FieldParams& params_;
  const AircraftParams& ac_;
  double beta_ = 0.0;
  bool have_beta_ = false;
};

}  // namespace

AircraftControls aircraft_controller(const AircraftState& state, const ImplicitPath& path, const FieldParams& params,
                                     const AircraftParams& ac) {
  return controls_from_sample(state, sample_field(path, params, state.position()), ac);
}

Trajectory integrate_aircraft(const ImplicitPath& path, const FieldParams& params, const AircraftParams& ac,
                              const AircraftState& state0, const IntegratorConfig& cfg, double t_end) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive and finite");
  ac.validate();
  cfg.validate();
  if (!(state0.s >= 0.0)) throw std::invalid_argument("initial airspeed must be non-negative");

  AircraftSystem system(path, params, ac);
  AircraftSystem::State x0;
  x0 << state0.x, state0.y, state0.z, wrap_angle(state0.theta), state0.s;

  Trajectory traj;
  traj.system = SystemKind::Aircraft;

  // beta = pi is an equilibrium of the heading error, but an unstable one.
  const AircraftControls c0 = aircraft_controller(AircraftSystem::unpack(x0), path, params, ac);
  if (c0.status == RhsStatus::Ok && std::abs(std::abs(c0.beta) - std::numbers::pi) < 1e-12)
    traj.events.push_back(Event{EventKind::UnstableEquilibrium, 0.0, state0.position(), "beta(0) = pi"});

  auto observer = [&](double t, const AircraftSystem::State& x, bool record) {
    TrajectorySample s = system.observe(t, x);
    if (record) traj.samples.push_back(s);
  };
  const IntegrationOutcome<5> outcome = integrate<5>(system, x0, t_end, cfg, observer);
  if (traj.samples.back().t < outcome.t) traj.samples.push_back(system.observe(outcome.t, outcome.state));
  traj.events.push_back(
      Event{detail::event_kind(outcome.reason), outcome.t, outcome.state.head<3>(), outcome.detail});
  return traj;
}

}  // namespace gvf3d

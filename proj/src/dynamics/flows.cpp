#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gvf3d/dynamics.hpp"
#include "internal.hpp"

namespace gvf3d {

const char* to_string(IntegratorMethod m) { return m == IntegratorMethod::Rk4 ? "rk4" : "rk45"; }

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("integrator dt must be positive");
  if (!(dt_min > 0.0) || !(dt_max > 0.0) || dt_min > dt_max)
    throw std::invalid_argument("integrator step bounds must satisfy 0 < dt_min <= dt_max");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("integrator tolerances must be positive");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
}

const char* to_string(SystemKind k) {
  switch (k) {
    case SystemKind::Raw: return "raw";
    case SystemKind::Normalized: return "normalized";
    case SystemKind::Perturbed: return "perturbed";
    case SystemKind::Aircraft: return "aircraft";
  }
  return "raw";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Completed: return "completed";
    case EventKind::SingularApproach: return "singular_approach";
    case EventKind::DomainExit: return "domain_exit";
    case EventKind::StepUnderflow: return "step_underflow";
    case EventKind::PlanarDegeneracy: return "planar_degeneracy";
    case EventKind::UnstableEquilibrium: return "unstable_equilibrium";
  }
  return "completed";
}

bool Trajectory::has_event(EventKind k) const {
  for (const Event& e : events)
    if (e.kind == k) return true;
  return false;
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a, two_pi);
  if (w <= -std::numbers::pi) w += two_pi;
  if (w > std::numbers::pi) w -= two_pi;
  return w;
}

namespace detail {

EventKind event_kind(StopReason r) {
  switch (r) {
    case StopReason::Completed: return EventKind::Completed;
    case StopReason::Singular: return EventKind::SingularApproach;
    case StopReason::DomainExit: return EventKind::DomainExit;
    case StopReason::PlanarDegeneracy: return EventKind::PlanarDegeneracy;
    case StopReason::StepUnderflow: return EventKind::StepUnderflow;
  }
  return EventKind::Completed;
}

void fill_field_columns(TrajectorySample& out, const FieldSample& s) {
  out.e = s.e;
  out.e_norm = s.e.norm();
  out.V = s.V;
  out.nke_norm = s.nke.norm();
  out.chi_norm = s.chi.norm();
}

}  // namespace detail

namespace {

enum class FlowKind { Raw, Normalized, Perturbed };

class FlowSystem {
 public:
  FlowSystem(const ImplicitPath& path, const FieldParams& params, FlowKind kind, const Disturbance* d)
      : path_(path), params_(params), kind_(kind), d_(d) {}

  RhsResult<3> rhs(double t, const Vec3& x) const {
    RhsResult<3> r;
    const FieldSample s = sample_field(path_, params_, x);
    r.status = evaluate(t, s, r.value);
    return r;
  }

  RhsStatus evaluate(double t, const FieldSample& s, Vec3& out) const {
    if (!s.valid) return RhsStatus::DomainExit;
    const double chi_norm = s.chi.norm();
    if (chi_norm < stop_threshold()) return RhsStatus::Singular;
    if (kind_ == FlowKind::Normalized) {
      out = s.chi / chi_norm;
    } else if (kind_ == FlowKind::Perturbed) {
      out = s.chi + (*d_)(t);
    } else {
      out = s.chi;
    }
    return out.allFinite() ? RhsStatus::Ok : RhsStatus::DomainExit;
  }

  // Near the singular set the unit-speed field turns on a length scale of
  // roughly |chi| / |J|; steps are kept below half of it.
  double max_step(const Vec3& x) const {
    if (kind_ != FlowKind::Normalized) return std::numeric_limits<double>::infinity();
    const FieldSample s = sample_field(path_, params_, x);
    if (!s.valid) return std::numeric_limits<double>::infinity();
    const double j = jacobian_field(s).norm();
    if (!(j > 0.0)) return std::numeric_limits<double>::infinity();
    return 0.5 * s.chi.norm() / j;
  }

  void normalize(Vec3&) const {}

  double stop_threshold() const { return kind_ == FlowKind::Normalized ? kNormalizedFlowStop : kRawFlowStop; }

  TrajectorySample observe(double t, const Vec3& x) const {
    TrajectorySample out;
    out.t = t;
    out.position = x;
    const FieldSample s = sample_field(path_, params_, x);
    detail::fill_field_columns(out, s);
    Vec3 v = Vec3::Zero();
    if (evaluate(t, s, v) == RhsStatus::Ok) out.speed = v.norm();
    if (kind_ == FlowKind::Perturbed) {
      out.edot = s.N.transpose() * (s.chi + (*d_)(t));
    } else {
      out.edot.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    return out;
  }

 private:
  const ImplicitPath& path_;
  const FieldParams& params_;
  FlowKind kind_;
  const Disturbance* d_;
};

Trajectory run_flow(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0, FlowKind kind,
                    const Disturbance* d, const IntegratorConfig& cfg, double t_end) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive and finite");
  if (!xi0.allFinite()) throw std::invalid_argument("initial point must be finite");
  cfg.validate();

  const FlowSystem system(path, params, kind, d);
  Trajectory traj;
  traj.system = kind == FlowKind::Raw ? SystemKind::Raw
                : kind == FlowKind::Normalized ? SystemKind::Normalized
                                               : SystemKind::Perturbed;
  auto observer = [&](double t, const Vec3& x, bool record) {
    if (record) traj.samples.push_back(system.observe(t, x));
  };
  const IntegrationOutcome<3> outcome = integrate<3>(system, xi0, t_end, cfg, observer);
  if (traj.samples.back().t < outcome.t) traj.samples.push_back(system.observe(outcome.t, outcome.state));
  traj.events.push_back(Event{detail::event_kind(outcome.reason), outcome.t, outcome.state, outcome.detail});
  return traj;
}

}  // namespace

Trajectory integrate_flow(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0,
                          const IntegratorConfig& integrator, double t_end) {
  return run_flow(path, params, xi0, FlowKind::Raw, nullptr, integrator, t_end);
}

Trajectory integrate_normalized_flow(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0,
                                     const IntegratorConfig& integrator, double t_end) {
  return run_flow(path, params, xi0, FlowKind::Normalized, nullptr, integrator, t_end);
}

Trajectory integrate_perturbed_flow(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0,
                                    const Disturbance& d, const IntegratorConfig& integrator, double t_end) {
  return run_flow(path, params, xi0, FlowKind::Perturbed, &d, integrator, t_end);
}

}  // namespace gvf3d

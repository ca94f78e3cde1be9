#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

namespace gvf3d {

enum class IntegratorMethod { Rk4, Rk45 };

const char* to_string(IntegratorMethod m);

/// Fixed-step classical RK4 (dt is the step) or adaptive Dormand-Prince 5(4)
/// (dt is the initial step, rtol/atol control the local error).
struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::Rk4;
  double dt = 1e-3;
  double rtol = 1e-9;
  double atol = 1e-9;
  double dt_min = 1e-12;
  double dt_max = 0.1;
  int record_every = 1;

  bool operator==(const IntegratorConfig&) const = default;

  /// Throws std::invalid_argument on non-positive steps or tolerances.
  void validate() const;
};

enum class RhsStatus { Ok, Singular, DomainExit, PlanarDegeneracy };

enum class StopReason { Completed, Singular, DomainExit, PlanarDegeneracy, StepUnderflow };

template <int N>
struct RhsResult {
  Eigen::Matrix<double, N, 1> value = Eigen::Matrix<double, N, 1>::Zero();
  RhsStatus status = RhsStatus::Ok;
};

template <int N>
struct IntegrationOutcome {
  StopReason reason = StopReason::Completed;
  double t = 0.0;
  Eigen::Matrix<double, N, 1> state;
  std::string detail;
};

namespace detail {

inline StopReason stop_reason(RhsStatus s) {
  switch (s) {
    case RhsStatus::Singular: return StopReason::Singular;
    case RhsStatus::DomainExit: return StopReason::DomainExit;
    case RhsStatus::PlanarDegeneracy: return StopReason::PlanarDegeneracy;
    case RhsStatus::Ok: break;
  }
  return StopReason::Completed;
}

}  // namespace detail

/// Drives a system from t = 0 to t_end.
///
/// System must provide
///   RhsResult<N> rhs(double t, const State& x) const;
///   double max_step(const State& x) const;   // upper bound on the next step
///   void normalize(State& x) const;          // applied after each accepted step
/// Observer is called as observer(t, x, record) after every accepted step and
/// at t = 0; record is true for the samples that belong in the trajectory.
///
/// Integration stops at the first non-Ok right-hand side at an accepted state,
/// and the outcome carries the last valid state.
template <int N, class System, class Observer>
IntegrationOutcome<N> integrate(const System& system, Eigen::Matrix<double, N, 1> x, double t_end,
                                const IntegratorConfig& cfg, Observer&& observer) {
  using State = Eigen::Matrix<double, N, 1>;
  IntegrationOutcome<N> out;
  double t = 0.0;
  long accepted = 0;
  const int stride = std::max(1, cfg.record_every);
  observer(t, static_cast<const State&>(x), true);

  auto finish = [&](StopReason reason, std::string detail) {
    out.reason = reason;
    out.t = t;
    out.state = x;
    out.detail = std::move(detail);
    return out;
  };

  auto accept = [&](const State& next, double t_next) {
    x = next;
    system.normalize(x);
    t = t_next;
    ++accepted;
    const bool last = t >= t_end;
    observer(t, static_cast<const State&>(x), last || accepted % stride == 0);
  };

  if (cfg.method == IntegratorMethod::Rk4) {
    const long steps = static_cast<long>(std::ceil(t_end / cfg.dt - 1e-9));
    for (long i = 1; i <= steps; ++i) {
      const double t_target = i == steps ? t_end : static_cast<double>(i) * cfg.dt;
      // A fixed step may be split when the system caps the step size.
      while (t < t_target) {
        RhsResult<N> k1 = system.rhs(t, x);
        if (k1.status != RhsStatus::Ok) return finish(detail::stop_reason(k1.status), "");
        double h = std::min(t_target - t, system.max_step(x));
        const bool full = h >= t_target - t;
        if (h < cfg.dt_min) return finish(StopReason::StepUnderflow, "step cap below dt_min");
        const State x2 = x + 0.5 * h * k1.value;
        RhsResult<N> k2 = system.rhs(t + 0.5 * h, x2);
        if (k2.status != RhsStatus::Ok) return finish(detail::stop_reason(k2.status), "stage 2");
        const State x3 = x + 0.5 * h * k2.value;
        RhsResult<N> k3 = system.rhs(t + 0.5 * h, x3);
        if (k3.status != RhsStatus::Ok) return finish(detail::stop_reason(k3.status), "stage 3");
        const State x4 = x + h * k3.value;
        RhsResult<N> k4 = system.rhs(t + h, x4);
        if (k4.status != RhsStatus::Ok) return finish(detail::stop_reason(k4.status), "stage 4");
        const State next = x + (h / 6.0) * (k1.value + 2.0 * k2.value + 2.0 * k3.value + k4.value);
        if (!next.allFinite()) return finish(StopReason::DomainExit, "non-finite state");
        accept(next, full ? t_target : t + h);
      }
    }
    return finish(StopReason::Completed, "");
  }

  // Dormand-Prince 5(4) with FSAL.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  double h = std::min(cfg.dt, cfg.dt_max);
  RhsResult<N> k1 = system.rhs(t, x);
  if (k1.status != RhsStatus::Ok) return finish(detail::stop_reason(k1.status), "");
  while (t < t_end) {
    h = std::min({h, t_end - t, system.max_step(x), cfg.dt_max});
    if (h < cfg.dt_min) {
      if (t_end - t < cfg.dt_min) {
        // Remaining interval is below resolution; treat as reached.
        t = t_end;
        observer(t, static_cast<const State&>(x), true);
        break;
      }
      return finish(StopReason::StepUnderflow, "adaptive step below dt_min");
    }
    RhsStatus failed = RhsStatus::Ok;
    auto stage = [&](double tc, const State& xc) {
      RhsResult<N> r = system.rhs(tc, xc);
      if (r.status != RhsStatus::Ok && failed == RhsStatus::Ok) failed = r.status;
      return r.value;
    };
    const State k2 = stage(t + c2 * h, x + h * (a21 * k1.value));
    const State k3 = stage(t + c3 * h, x + h * (a31 * k1.value + a32 * k2));
    const State k4 = stage(t + c4 * h, x + h * (a41 * k1.value + a42 * k2 + a43 * k3));
    const State k5 = stage(t + c5 * h, x + h * (a51 * k1.value + a52 * k2 + a53 * k3 + a54 * k4));
    const State k6 = stage(t + h, x + h * (a61 * k1.value + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const State next = x + h * (b1 * k1.value + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    RhsResult<N> k7{};
    if (failed == RhsStatus::Ok) {
      k7 = system.rhs(t + h, next);
      if (k7.status != RhsStatus::Ok) failed = k7.status;
    }
    if (failed != RhsStatus::Ok || !next.allFinite()) {
      // Trial stage left the admissible region; retry with a smaller step.
      h *= 0.25;
      if (h < cfg.dt_min)
        return finish(failed == RhsStatus::Ok ? StopReason::DomainExit : detail::stop_reason(failed),
                      "trial stages failed at minimum step");
      continue;
    }
    const State err = h * (e1 * k1.value + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7.value);
    double err_norm = 0.0;
    for (int i = 0; i < x.size(); ++i) {
      const double scale = cfg.atol + cfg.rtol * std::max(std::abs(x[i]), std::abs(next[i]));
      err_norm = std::max(err_norm, std::abs(err[i]) / scale);
    }
    if (err_norm <= 1.0) {
      const double t_next = (t_end - (t + h) < 1e-12 * std::max(1.0, t_end)) ? t_end : t + h;
      accept(next, t_next);
      k1 = system.rhs(t, x);
      if (k1.status != RhsStatus::Ok) return finish(detail::stop_reason(k1.status), "");
      const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      h *= factor;
    } else {
      h *= std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.9);
    }
  }
  return finish(StopReason::Completed, "");
}

}  // namespace gvf3d

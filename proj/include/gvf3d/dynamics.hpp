#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gvf3d/implicit_path.hpp"
#include "gvf3d/integrator.hpp"
#include "gvf3d/vector_field.hpp"

namespace gvf3d {

/// Piecewise continuous, bounded disturbance d(t) added to the flow.
class Disturbance {
 public:
  enum class Kind { Zero, Constant, Sinusoid, Decaying };

  static Disturbance zero();
  static Disturbance constant(const Vec3& d);
  /// d_i(t) = amplitude_i sin(frequency_i t + phase_i), frequency in rad/s.
  static Disturbance sinusoid(const Vec3& amplitude, const Vec3& frequency, const Vec3& phase);
  /// d(t) = d0 exp(-rate t), rate > 0.
  static Disturbance decaying(const Vec3& d0, double rate);

  Vec3 operator()(double t) const;

  /// Upper bound on sup_t |d(t)|.
  double sup_norm() const;

  Kind kind() const { return kind_; }
  const Vec3& vector() const { return vector_; }
  const Vec3& frequency() const { return frequency_; }
  const Vec3& phase() const { return phase_; }
  double rate() const { return rate_; }

  bool operator==(const Disturbance&) const = default;

 private:
  Kind kind_ = Kind::Zero;
  Vec3 vector_ = Vec3::Zero();  // constant value, amplitude, or d0
  Vec3 frequency_ = Vec3::Zero();
  Vec3 phase_ = Vec3::Zero();
  double rate_ = 0.0;
};

const char* to_string(Disturbance::Kind k);

/// Kinematic state of the fixed-wing model.
struct AircraftState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;  // yaw, wrapped to (-pi, pi]
  double s = 0.0;      // airspeed, >= 0

  Vec3 position() const { return Vec3(x, y, z); }
};

struct AircraftParams {
  double tau_z = 1.0;
  double tau_theta = 1.0;
  double tau_s = 1.0;
  double k_theta = 1.0;
  double s_star = 1.0;

  bool operator==(const AircraftParams&) const = default;

  /// Throws std::invalid_argument unless every entry is strictly positive.
  void validate() const;
};

enum class SystemKind { Raw, Normalized, Perturbed, Aircraft };

const char* to_string(SystemKind k);

enum class EventKind { Completed, SingularApproach, DomainExit, StepUnderflow, PlanarDegeneracy, UnstableEquilibrium };

const char* to_string(EventKind k);

struct Event {
  EventKind kind = EventKind::Completed;
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  std::string detail;
};

struct TrajectorySample {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  double theta = 0.0;     // aircraft only
  double airspeed = 0.0;  // aircraft only
  Vec2 e = Vec2::Zero();
  double e_norm = 0.0;
  double V = 0.0;
  double nke_norm = 0.0;
  double chi_norm = 0.0;
  double beta = 0.0;         // aircraft only; unwrapped
  double speed = 0.0;        // |d xi / dt| at the sample
  Vec2 edot = Vec2::Zero();  // perturbed flow only: N^T (chi + d)
};

/// Time-stamped samples of one run plus the events that occurred.
/// Sample times are strictly increasing; the last event is the termination.
struct Trajectory {
  SystemKind system = SystemKind::Raw;
  std::vector<TrajectorySample> samples;
  std::vector<Event> events;

  const Event& termination() const { return events.back(); }
  bool completed() const { return !events.empty() && events.back().kind == EventKind::Completed; }
  bool has_event(EventKind k) const;
  double final_error() const { return samples.back().e_norm; }
};

/// Halting thresholds on |chi| for the raw and the normalized flow.
inline constexpr double kRawFlowStop = 1e-10;
inline constexpr double kNormalizedFlowStop = 1e-6;
/// Minimum planar norm |(chi_hat_1, chi_hat_2)| accepted by the aircraft controller.
inline constexpr double kPlanarEpsilon = 1e-9;

/// d xi / dt = chi(xi).
Trajectory integrate_flow(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0,
                          const IntegratorConfig& integrator, double t_end);

/// d xi / dt = chi(xi) / |chi(xi)|. Steps are capped near the singular set so
/// the run halts with a singular_approach event instead of chattering.
Trajectory integrate_normalized_flow(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0,
                                     const IntegratorConfig& integrator, double t_end);

/// d xi / dt = chi(xi) + d(t); samples also carry edot = N^T (chi + d).
Trajectory integrate_perturbed_flow(const ImplicitPath& path, const FieldParams& params, const Vec3& xi0,
                                    const Disturbance& d, const IntegratorConfig& integrator, double t_end);

struct AircraftControls {
  RhsStatus status = RhsStatus::Ok;
  double theta_u = 0.0;
  double z_u = 0.0;
  double s_u = 0.0;
  double theta_d_dot = 0.0;
  double beta = 0.0;  // signed angle from the planar field direction to the heading
  Vec3 velocity = Vec3::Zero();
};

/// Heading, altitude and speed commands steering the aircraft along the field:
///   theta_u = tau_theta (theta_d_dot - k_theta h^T E chi_p_hat) + theta
///   theta_d_dot = -chi_p_hat^T E J(chi_p) xi_dot / |chi_p|
///   z_u = z + tau_z s chi_3 / |(chi_1, chi_2)|,  s_u = s*
/// status reports Singular or PlanarDegeneracy when the planar direction is undefined.
AircraftControls aircraft_controller(const AircraftState& state, const ImplicitPath& path, const FieldParams& params,
                                     const AircraftParams& ac);

/// Closed-loop fixed-wing model under aircraft_controller; samples carry beta.
Trajectory integrate_aircraft(const ImplicitPath& path, const FieldParams& params, const AircraftParams& ac,
                              const AircraftState& state0, const IntegratorConfig& integrator, double t_end);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// CSV columns for a system kind, in output order.
std::vector<std::string> csv_columns(SystemKind kind);

/// Writes a header row and one row per sample with %.17g floats.
void write_csv(const Trajectory& traj, std::ostream& out);

/// Reads a trajectory written by write_csv. The system kind is inferred from
/// the header. Throws std::runtime_error on malformed input or when the file
/// holds no samples.
Trajectory read_csv(std::istream& in);

}  // namespace gvf3d

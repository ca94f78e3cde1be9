#include <cmath>
#include <stdexcept>

#include "gvf3d/dynamics.hpp"

namespace gvf3d {

Disturbance Disturbance::zero() { return Disturbance{}; }

Disturbance Disturbance::constant(const Vec3& d) {
  if (!d.allFinite()) throw std::invalid_argument("constant disturbance must be finite");
  Disturbance out;
  out.kind_ = Kind::Constant;
  out.vector_ = d;
  return out;
}

Disturbance Disturbance::sinusoid(const Vec3& amplitude, const Vec3& frequency, const Vec3& phase) {
  if (!amplitude.allFinite() || !frequency.allFinite() || !phase.allFinite())
    throw std::invalid_argument("sinusoid parameters must be finite");
  Disturbance out;
  out.kind_ = Kind::Sinusoid;
  out.vector_ = amplitude;
  out.frequency_ = frequency;
  out.phase_ = phase;
  return out;
}

Disturbance Disturbance::decaying(const Vec3& d0, double rate) {
  if (!d0.allFinite()) throw std::invalid_argument("decaying disturbance d0 must be finite");
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("decay rate must be positive");
  Disturbance out;
  out.kind_ = Kind::Decaying;
  out.vector_ = d0;
  out.rate_ = rate;
  return out;
}

Vec3 Disturbance::operator()(double t) const {
  switch (kind_) {
    case Kind::Zero: return Vec3::Zero();
    case Kind::Constant: return vector_;
    case Kind::Sinusoid:
      return Vec3(vector_.x() * std::sin(frequency_.x() * t + phase_.x()),
                  vector_.y() * std::sin(frequency_.y() * t + phase_.y()),
                  vector_.z() * std::sin(frequency_.z() * t + phase_.z()));
    case Kind::Decaying: return vector_ * std::exp(-rate_ * t);
  }
  return Vec3::Zero();
}

double Disturbance::sup_norm() const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Constant:
    case Kind::Decaying: return vector_.norm();
    case Kind::Sinusoid: return vector_.cwiseAbs().norm();
  }
  return 0.0;
}

const char* to_string(Disturbance::Kind k) {
  switch (k) {
    case Disturbance::Kind::Zero: return "zero";
    case Disturbance::Kind::Constant: return "constant";
    case Disturbance::Kind::Sinusoid: return "sinusoid";
    case Disturbance::Kind::Decaying: return "decaying";
  }
  return "zero";
}

}  // namespace gvf3d

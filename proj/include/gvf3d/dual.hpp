#pragma once

#include <array>
#include <cmath>

namespace gvf3d {

/// Second-order forward-mode dual number over three independent variables.
///
/// Carries a value, its gradient, and the six unique entries of its Hessian,
/// so one evaluation of a scalar expression yields exact first and second
/// partial derivatives. Every elementary function is lifted through the
/// second-order chain rule
///   (f o u)_i  = f'(u) u_i
///   (f o u)_ij = f'(u) u_ij + f''(u) u_i u_j,
/// which keeps the Hessian symmetric by construction.
struct Dual2 {
  double value = 0.0;
  std::array<double, 3> grad{};
  // Upper triangle, row major: xx, xy, xz, yy, yz, zz.
  std::array<double, 6> hess{};

  static constexpr Dual2 constant(double v) { return Dual2{v, {}, {}}; }

  static constexpr Dual2 variable(double v, int axis) {
    Dual2 d{v, {}, {}};
    d.grad[static_cast<std::size_t>(axis)] = 1.0;
    return d;
  }

  static constexpr int hess_index(int i, int j) {
    if (i > j) {
      const int t = i;
      i = j;
      j = t;
    }
    // Offsets of the first element of rows 0, 1, 2 in the packed upper triangle.
    constexpr int row_start[3] = {0, 3, 5};
    return row_start[i] + (j - i);
  }

  constexpr double h(int i, int j) const { return hess[static_cast<std::size_t>(hess_index(i, j))]; }

  bool is_finite() const {
    if (!std::isfinite(value)) return false;
    for (double g : grad)
      if (!std::isfinite(g)) return false;
    for (double v : hess)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

namespace detail {

// Applies a scalar function given its value and first two derivatives at u.value.
inline Dual2 chain(const Dual2& u, double f, double df, double d2f) {
  Dual2 r;
  r.value = f;
  for (int i = 0; i < 3; ++i) r.grad[i] = df * u.grad[i];
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      const int k = Dual2::hess_index(i, j);
      r.hess[k] = df * u.hess[k] + d2f * u.grad[i] * u.grad[j];
    }
  }
  return r;
}

inline double ipow(double x, int n) {
  double r = 1.0;
  double b = x;
  unsigned e = static_cast<unsigned>(n);
  while (e) {
    if (e & 1u) r *= b;
    b *= b;
    e >>= 1u;
  }
  return r;
}

}  // namespace detail

inline Dual2 operator+(const Dual2& a, const Dual2& b) {
  Dual2 r;
  r.value = a.value + b.value;
  for (int i = 0; i < 3; ++i) r.grad[i] = a.grad[i] + b.grad[i];
  for (int k = 0; k < 6; ++k) r.hess[k] = a.hess[k] + b.hess[k];
  return r;
}

inline Dual2 operator-(const Dual2& a) {
  Dual2 r;
  r.value = -a.value;
  for (int i = 0; i < 3; ++i) r.grad[i] = -a.grad[i];
  for (int k = 0; k < 6; ++k) r.hess[k] = -a.hess[k];
  return r;
}

inline Dual2 operator-(const Dual2& a, const Dual2& b) {
  Dual2 r;
  r.value = a.value - b.value;
  for (int i = 0; i < 3; ++i) r.grad[i] = a.grad[i] - b.grad[i];
  for (int k = 0; k < 6; ++k) r.hess[k] = a.hess[k] - b.hess[k];
  return r;
}

inline Dual2 operator*(const Dual2& a, const Dual2& b) {
  Dual2 r;
  r.value = a.value * b.value;
  for (int i = 0; i < 3; ++i) r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      const int k = Dual2::hess_index(i, j);
      r.hess[k] = a.hess[k] * b.value + a.value * b.hess[k] + a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i];
    }
  }
  return r;
}

inline Dual2 reciprocal(const Dual2& u) {
  const double inv = 1.0 / u.value;
  return detail::chain(u, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Dual2 operator/(const Dual2& a, const Dual2& b) { return a * reciprocal(b); }

/// Non-negative integer power; keeps the result C-infinity everywhere.
inline Dual2 pow(const Dual2& u, int n) {
  if (n == 0) return Dual2::constant(1.0);
  const double x = u.value;
  const double f = detail::ipow(x, n);
  const double df = n * detail::ipow(x, n - 1);
  const double d2f = n >= 2 ? static_cast<double>(n) * (n - 1) * detail::ipow(x, n - 2) : 0.0;
  return detail::chain(u, f, df, d2f);
}

inline Dual2 sin(const Dual2& u) {
  const double s = std::sin(u.value);
  return detail::chain(u, s, std::cos(u.value), -s);
}

inline Dual2 cos(const Dual2& u) {
  const double c = std::cos(u.value);
  return detail::chain(u, c, -std::sin(u.value), -c);
}

inline Dual2 tan(const Dual2& u) {
  const double t = std::tan(u.value);
  const double sec2 = 1.0 + t * t;
  return detail::chain(u, t, sec2, 2.0 * t * sec2);
}

inline Dual2 exp(const Dual2& u) {
  const double e = std::exp(u.value);
  return detail::chain(u, e, e, e);
}

/// Natural logarithm. Non-positive arguments produce non-finite entries.
inline Dual2 log(const Dual2& u) {
  if (!(u.value > 0.0)) {
    const double nan = std::nan("");
    return detail::chain(u, nan, nan, nan);
  }
  const double inv = 1.0 / u.value;
  return detail::chain(u, std::log(u.value), inv, -inv * inv);
}

/// Square root. The derivative is unbounded at zero, so only strictly
/// positive arguments give a finite result.
inline Dual2 sqrt(const Dual2& u) {
  if (!(u.value > 0.0)) {
    const double nan = std::nan("");
    return detail::chain(u, nan, nan, nan);
  }
  const double s = std::sqrt(u.value);
  return detail::chain(u, s, 0.5 / s, -0.25 / (s * u.value));
}

}  // namespace gvf3d

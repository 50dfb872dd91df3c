#pragma once

// Closed-loop optimal pitch law for a constantly thrusting stage.
//
// With a free constant thrust level the velocity costate keeps a constant
// modulus, which ties the local pitch θ to the current kinematics (r, v, γ):
//
//   γ = θ + asin( (v_c/v) sinθ / sqrt(1 - 3 sin²θ) ),   |θ| <= θ_m,
//   θ_m = asin( 1 / sqrt(3 + (v_c/v)²) ),               v_c = sqrt(μ/r).
//
// The right-hand side (F⁺) is strictly increasing on [-θ_m, θ_m], so the
// pitch is found by bisection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "astro.hpp"
#include "errors.hpp"

namespace insertion {

enum class Branch { plus, minus };

struct PitchSolution {
  double theta = 0.0;      // rad, local pitch above horizontal
  double omega = 0.0;      // rad/s, costate angular rate (sign of the Hamiltonian relation)
  double theta_max = 0.0;  // rad
};

/// Upper bound on |θ| for which the pitch equation is real.
inline double pitch_bound(double vc_over_v) {
  return std::asin(1.0 / std::sqrt(3.0 + vc_over_v * vc_over_v));
}

inline double pitch_bound(double radius, double speed, const Constants& c) {
  return pitch_bound(circular_speed(radius, c) / speed);
}

namespace detail {

inline double branch_argument(double theta, double vc_over_v) {
  const double s = std::sin(theta);
  const double q = 1.0 - 3.0 * s * s;
  if (!(q > 0.0)) return std::copysign(std::numeric_limits<double>::infinity(), s);
  return vc_over_v * s / std::sqrt(q);
}

// F⁺ with the asin argument clamped; only used inside the bracket where the
// argument can overshoot ±1 by rounding.
inline double plus_branch_clamped(double theta, double vc_over_v) {
  const double arg = std::clamp(branch_argument(theta, vc_over_v), -1.0, 1.0);
  return theta + std::asin(arg);
}

}  // namespace detail

/// F⁺(θ) or F⁻(θ), the k = 0 solutions of the pitch relation for γ.
inline double eval_branch(double theta, Branch branch, double vc_over_v) {
  double arg = detail::branch_argument(theta, vc_over_v);
  if (!(std::abs(arg) <= 1.0 + 1e-12))
    throw DomainError("eval_branch: asin argument outside [-1, 1] at theta = " + std::to_string(theta));
  arg = std::clamp(arg, -1.0, 1.0);
  const double a = std::asin(arg);
  return branch == Branch::plus ? theta + a : theta - a;
}

/// Unique root θ⁺ of F⁺(θ) = γ on [-θ_m, θ_m].
inline double solve_pitch(double radius, double speed, double flight_path_angle, const Constants& c) {
  if (!(radius > 0.0) || !(speed > 0.0)) throw DomainError("solve_pitch: radius and speed must be positive");
  const double ratio = circular_speed(radius, c) / speed;
  const double theta_m = pitch_bound(ratio);
  if (!(std::abs(flight_path_angle) <= theta_m + std::numbers::pi / 2))
    throw NoPitchSolution("flight path angle " + std::to_string(rad_to_deg(flight_path_angle)) +
                          " deg outside the range of the pitch law");

  double lo = -theta_m * (1.0 - 1e-12);
  double hi = theta_m * (1.0 - 1e-12);
  if (flight_path_angle <= detail::plus_branch_clamped(lo, ratio)) return lo;
  if (flight_path_angle >= detail::plus_branch_clamped(hi, ratio)) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (detail::plus_branch_clamped(mid, ratio) < flight_path_angle)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-18 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
      break;
  }
  return 0.5 * (lo + hi);
}

/// Costate angular rate from the Hamiltonian relation ω v sin(θ-γ) = μ/r² sinθ,
/// checked against the modulus relation ω² = μ/r³ (1 - 3 sin²θ).
inline double angular_rate(double radius, double speed, double flight_path_angle, double theta,
                           const Constants& c) {
  const double s = std::sin(theta);
  const double q = 1.0 - 3.0 * s * s;
  if (!(q >= 0.0)) throw ConsistencyError("angular_rate: pitch beyond 35.26 deg");
  const double modulus = std::sqrt(c.mu / (radius * radius * radius) * q);
  const double d = std::sin(theta - flight_path_angle);
  // θ = γ = 0 makes the Hamiltonian relation 0/0; take the negative root,
  // continuous with the rest of the F⁺ branch.
  if (std::abs(d) <= 1e-12 && std::abs(s) <= 1e-12) return -modulus;
  if (d == 0.0) throw ConsistencyError("angular_rate: sin(theta - gamma) vanishes with nonzero pitch");
  const double omega = c.mu * s / (radius * radius * speed * d);
  if (std::abs(std::abs(omega) - modulus) > 1e-6 * modulus)
    throw ConsistencyError("angular_rate: (theta, gamma) violate the costate modulus relation");
  return omega;
}

inline PitchSolution closed_loop_pitch(const PolarKinematics& k, const Constants& c) {
  PitchSolution p;
  p.theta_max = pitch_bound(k.radius, k.speed, c);
  p.theta = solve_pitch(k.radius, k.speed, k.flight_path_angle, c);
  p.omega = angular_rate(k.radius, k.speed, k.flight_path_angle, p.theta, c);
  return p;
}

/// Thrust direction for pitch θ at longitude φ, (sin(θ-φ), cos(θ-φ)).
inline Vec2 thrust_direction(double theta, double longitude) {
  return {std::sin(theta - longitude), std::cos(theta - longitude)};
}

/// Unit normal to the thrust direction, positively oriented.
inline Vec2 thrust_normal(double theta, double longitude) {
  return {-std::cos(theta - longitude), std::sin(theta - longitude)};
}

/// Local pitch of an inertial thrust direction at longitude φ.
inline double pitch_of_direction(const Vec2& u, double longitude) {
  double theta = std::atan2(u.x(), u.y()) + longitude;
  theta = std::remainder(theta, 2.0 * std::numbers::pi);
  return theta;
}

}  // namespace insertion

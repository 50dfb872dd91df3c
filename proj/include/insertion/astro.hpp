#pragma once

// Planar two-body substrate: constants, state types, central gravity and
// conversions between Cartesian states, polar kinematics and apsides.
// Everything here is SI (m, m/s, kg, rad).

#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Dense>

#include "errors.hpp"

namespace insertion {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct Constants {
  double mu = 3.986005e14;           // m^3/s^2
  double earth_radius = 6378137.0;   // m
  double g0 = 9.80665;               // m/s^2, Isp conversion only

  void validate() const {
    if (!(mu > 0.0)) throw ValidationError("constants.mu must be positive");
    if (!(earth_radius > 0.0)) throw ValidationError("constants.earth_radius must be positive");
    if (!(g0 > 0.0)) throw ValidationError("constants.g0 must be positive");
  }
};

struct CartesianState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double mass = 0.0;
};

/// Radius, speed, flight path angle above the local horizontal and
/// longitude from the x axis.
struct PolarKinematics {
  double radius = 0.0;
  double speed = 0.0;
  double flight_path_angle = 0.0;
  double longitude = 0.0;
};

struct OrbitSpec {
  double apogee_altitude = 0.0;
  double perigee_altitude = 0.0;
  std::optional<double> true_anomaly;
};

struct Apsides {
  double apogee_altitude = 0.0;
  double perigee_altitude = 0.0;
};

inline double circular_speed(double radius, const Constants& c) { return std::sqrt(c.mu / radius); }

inline Vec2 gravity(const Vec2& position, const Constants& c) {
  const double r = position.norm();
  if (!(r > 0.0)) throw DomainError("gravity: zero radius");
  return -c.mu / (r * r * r) * position;
}

/// Jacobian of gravity with respect to position, mu/r^3 (3 e_r e_r^T - I).
inline Mat2 gravity_gradient(const Vec2& position, const Constants& c) {
  const double r = position.norm();
  if (!(r > 0.0)) throw DomainError("gravity_gradient: zero radius");
  const Vec2 e_r = position / r;
  return c.mu / (r * r * r) * (3.0 * e_r * e_r.transpose() - Mat2::Identity());
}

inline Apsides osculating_apsides(const Vec2& position, const Vec2& velocity, const Constants& c) {
  const double r = position.norm();
  if (!(r > 0.0)) throw DomainError("osculating_apsides: zero radius");
  const double energy = 0.5 * velocity.squaredNorm() - c.mu / r;
  if (!(energy < 0.0)) throw EscapeTrajectory("osculating_apsides: non-elliptic state (specific energy >= 0)");
  const double a = -c.mu / (2.0 * energy);
  const double h = position.x() * velocity.y() - position.y() * velocity.x();
  const double e = std::sqrt(std::max(0.0, 1.0 + 2.0 * energy * h * h / (c.mu * c.mu)));
  return {a * (1.0 + e) - c.earth_radius, a * (1.0 - e) - c.earth_radius};
}

inline Apsides osculating_apsides(const CartesianState& s, const Constants& c) {
  return osculating_apsides(s.position, s.velocity, c);
}

/// Kinematics on the conic described by `spec` at its true anomaly. The x axis
/// points to the perigee, so the longitude equals the anomaly.
inline PolarKinematics state_from_orbit(const OrbitSpec& spec, const Constants& c) {
  if (!spec.true_anomaly) throw DomainError("state_from_orbit: true anomaly required");
  if (spec.apogee_altitude < spec.perigee_altitude)
    throw DomainError("state_from_orbit: apogee below perigee");
  const double r_a = c.earth_radius + spec.apogee_altitude;
  const double r_p = c.earth_radius + spec.perigee_altitude;
  if (!(r_p > 0.0)) throw DomainError("state_from_orbit: non-positive perigee radius");
  const double a = 0.5 * (r_a + r_p);
  const double e = (r_a - r_p) / (r_a + r_p);
  const double p = 2.0 * r_a * r_p / (r_a + r_p);
  const double nu = *spec.true_anomaly;
  const double r = p / (1.0 + e * std::cos(nu));
  PolarKinematics k;
  k.radius = r;
  k.speed = std::sqrt(c.mu * (2.0 / r - 1.0 / a));
  k.flight_path_angle = std::atan2(e * std::sin(nu), 1.0 + e * std::cos(nu));
  k.longitude = nu;
  return k;
}

/// Vis-viva speed at the perigee of an elliptic orbit.
inline double perigee_speed(const OrbitSpec& spec, const Constants& c) {
  const double r_a = c.earth_radius + spec.apogee_altitude;
  const double r_p = c.earth_radius + spec.perigee_altitude;
  if (!(r_p > 0.0) || r_a < r_p) throw DomainError("perigee_speed: invalid orbit");
  const double a = 0.5 * (r_a + r_p);
  return std::sqrt(c.mu * (2.0 / r_p - 1.0 / a));
}

inline CartesianState cartesian_from_polar(const PolarKinematics& k, double mass) {
  CartesianState s;
  s.position = k.radius * Vec2(std::cos(k.longitude), std::sin(k.longitude));
  const double heading = k.flight_path_angle - k.longitude;
  s.velocity = k.speed * Vec2(std::sin(heading), std::cos(heading));
  s.mass = mass;
  return s;
}

inline PolarKinematics polar_from_cartesian(const Vec2& position, const Vec2& velocity) {
  PolarKinematics k;
  k.radius = position.norm();
  k.speed = velocity.norm();
  const double radial = position.dot(velocity);
  const double h = position.x() * velocity.y() - position.y() * velocity.x();
  k.flight_path_angle = std::atan2(radial, h);
  k.longitude = std::atan2(position.y(), position.x());
  return k;
}

inline PolarKinematics polar_from_cartesian(const CartesianState& s) {
  return polar_from_cartesian(s.position, s.velocity);
}

}  // namespace insertion

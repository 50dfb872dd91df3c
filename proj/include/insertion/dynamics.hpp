#pragma once

// Equations of motion of a constantly thrusting point mass in a central field,
// the coupled state/costate (extremal) system, and trajectory propagation
// under either the closed-loop pitch law or the costate-driven control.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "astro.hpp"
#include "closed_loop.hpp"
#include "errors.hpp"
#include "integrator.hpp"

namespace insertion {

/// Adjoints of position (kg/m), velocity (kg/(m/s)) and mass (kg/kg), with the
/// cost multiplier normalised to -1.
struct Costate {
  Vec2 p_r = Vec2::Zero();
  Vec2 p_v = Vec2::Zero();
  double p_m = 0.0;

  Costate scaled(double factor) const { return {factor * p_r, factor * p_v, factor * p_m}; }
};

struct BurnParameters {
  double thrust = 0.0;            // N
  double exhaust_velocity = 0.0;  // m/s
};

struct StateDerivative {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double mass = 0.0;
};

struct ExtremalDerivative {
  StateDerivative state;
  Costate costate;
};

/// H = H0 + T * H_T.
struct HamiltonianParts {
  double total = 0.0;
  double h0 = 0.0;
  double ht = 0.0;
};

inline StateDerivative state_rhs(const CartesianState& s, const Vec2& u, double thrust, double exhaust_velocity,
                                 const Constants& c) {
  if (!(s.mass > 0.0)) throw MassDepleted("state_rhs: non-positive mass");
  if (std::abs(u.norm() - 1.0) > 1e-9) throw DomainError("state_rhs: thrust direction is not a unit vector");
  StateDerivative d;
  d.position = s.velocity;
  d.velocity = gravity(s.position, c) + (thrust / s.mass) * u;
  d.mass = -thrust / exhaust_velocity;
  return d;
}

inline ExtremalDerivative extremal_rhs(const CartesianState& s, const Costate& costate, double thrust,
                                       double exhaust_velocity, const Constants& c) {
  const double pv = costate.p_v.norm();
  if (!(pv > 0.0)) throw SingularCostate("extremal_rhs: velocity costate vanished");
  ExtremalDerivative d;
  d.state = state_rhs(s, costate.p_v / pv, thrust, exhaust_velocity, c);
  d.costate.p_r = -gravity_gradient(s.position, c) * costate.p_v;
  d.costate.p_v = -costate.p_r;
  d.costate.p_m = thrust / (s.mass * s.mass) * pv;
  return d;
}

/// Hamiltonian evaluated with the optimal direction u = p_v/|p_v|.
inline HamiltonianParts hamiltonian(const CartesianState& s, const Costate& costate, double thrust,
                                    double exhaust_velocity, const Constants& c) {
  if (!(s.mass > 0.0)) throw MassDepleted("hamiltonian: non-positive mass");
  HamiltonianParts h;
  h.h0 = costate.p_r.dot(s.velocity) + costate.p_v.dot(gravity(s.position, c));
  h.ht = costate.p_v.norm() / s.mass - costate.p_m / exhaust_velocity;
  h.total = h.h0 + thrust * h.ht;
  return h;
}

struct TrajectorySample {
  double time = 0.0;
  CartesianState state;
  PolarKinematics kinematics;
  double pitch = 0.0;
  Apsides apsides;
  std::optional<Costate> costate;
  std::optional<HamiltonianParts> hamiltonian;
};

struct Trajectory {
  BurnParameters burn;
  std::vector<TrajectorySample> samples;

  const TrajectorySample& initial() const { return samples.front(); }
  const TrajectorySample& final() const { return samples.back(); }
};

/// 0, step, 2 step, ... and the exact final time. A non-positive step gives {0, t_f}.
inline std::vector<double> sample_times(double burn_time, double step) {
  std::vector<double> times{0.0};
  if (step > 0.0) {
    for (long i = 1;; ++i) {
      const double t = static_cast<double>(i) * step;
      if (t >= burn_time - 1e-9 * step) break;
      times.push_back(t);
    }
  }
  if (burn_time > 0.0) times.push_back(burn_time);
  return times;
}

namespace detail {

using ClosedLoopVector = StateVector<5>;
using ExtremalVector = StateVector<10>;

inline CartesianState unpack_state(const auto& y) {
  return {Vec2(y[0], y[1]), Vec2(y[2], y[3]), y[4]};
}

inline Costate unpack_costate(const ExtremalVector& y) {
  return {Vec2(y[5], y[6]), Vec2(y[7], y[8]), y[9]};
}

inline void check_burn(const CartesianState& initial, const BurnParameters& burn, double burn_time) {
  if (!(burn.exhaust_velocity > 0.0)) throw DomainError("propagate: exhaust velocity must be positive");
  if (!(burn.thrust >= 0.0)) throw DomainError("propagate: thrust must be non-negative");
  if (!(burn_time >= 0.0) || !std::isfinite(burn_time)) throw DomainError("propagate: invalid burn time");
  if (!(initial.mass > 0.0)) throw MassDepleted("propagate: non-positive initial mass");
  if (burn.thrust > 0.0) {
    const double depletion = initial.mass * burn.exhaust_velocity / burn.thrust;
    if (burn_time >= depletion) throw PropagationError(FailureKind::mass_depleted, depletion, "mass exhausted");
  }
}

inline TrajectorySample annotate(double t, const CartesianState& s, const Constants& c) {
  TrajectorySample sample;
  sample.time = t;
  sample.state = s;
  sample.kinematics = polar_from_cartesian(s);
  try {
    sample.apsides = osculating_apsides(s, c);
  } catch (const Error& e) {
    throw PropagationError(e.kind(), t, e.what());
  }
  return sample;
}

}  // namespace detail

/// Thrust direction of the closed-loop law at state s.
inline Vec2 closed_loop_direction(const CartesianState& s, const Constants& c) {
  const PolarKinematics k = polar_from_cartesian(s);
  const double theta = solve_pitch(k.radius, k.speed, k.flight_path_angle, c);
  return thrust_direction(theta, k.longitude);
}

/// Propagates the motion with the pitch re-solved from (r, v, γ) at every
/// integrator stage. Samples carry the pitch and osculating apsides.
inline Trajectory propagate_closed_loop(const CartesianState& initial, const BurnParameters& burn, double burn_time,
                                        const Constants& c, const IntegratorSettings& settings,
                                        double sample_step = 0.0) {
  detail::check_burn(initial, burn, burn_time);
  using V = detail::ClosedLoopVector;
  auto rhs = [&](double, const V& y) -> V {
    const CartesianState s = detail::unpack_state(y);
    const StateDerivative d = state_rhs(s, closed_loop_direction(s, c), burn.thrust, burn.exhaust_velocity, c);
    V dy;
    dy << d.position, d.velocity, d.mass;
    return dy;
  };
  V y0;
  y0 << initial.position, initial.velocity, initial.mass;
  V tol;
  tol << settings.abs_tol_position, settings.abs_tol_position, settings.abs_tol_velocity, settings.abs_tol_velocity,
      settings.abs_tol_mass;
  const std::vector<double> times = sample_times(burn_time, sample_step);
  const OdeSamples<5> sol = integrate<5>(rhs, y0, 0.0, burn_time, times, tol, settings);

  Trajectory traj;
  traj.burn = burn;
  traj.samples.reserve(sol.times.size());
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    TrajectorySample sample = detail::annotate(sol.times[i], detail::unpack_state(sol.states[i]), c);
    try {
      sample.pitch = solve_pitch(sample.kinematics.radius, sample.kinematics.speed,
                                 sample.kinematics.flight_path_angle, c);
    } catch (const Error& e) {
      throw PropagationError(e.kind(), sample.time, e.what());
    }
    traj.samples.push_back(sample);
  }
  return traj;
}

/// Propagates state and costates together, the thrust following p_v.
inline Trajectory propagate_extremal(const CartesianState& initial, const Costate& costate0, const BurnParameters& burn,
                                     double burn_time, const Constants& c, const IntegratorSettings& settings,
                                     double sample_step = 0.0) {
  detail::check_burn(initial, burn, burn_time);
  if (!(costate0.p_v.norm() > 0.0)) throw SingularCostate("propagate_extremal: zero initial velocity costate");
  using V = detail::ExtremalVector;
  auto rhs = [&](double, const V& y) -> V {
    const ExtremalDerivative d =
        extremal_rhs(detail::unpack_state(y), detail::unpack_costate(y), burn.thrust, burn.exhaust_velocity, c);
    V dy;
    dy << d.state.position, d.state.velocity, d.state.mass, d.costate.p_r, d.costate.p_v, d.costate.p_m;
    return dy;
  };
  V y0;
  y0 << initial.position, initial.velocity, initial.mass, costate0.p_r, costate0.p_v, costate0.p_m;
  V tol;
  tol << settings.abs_tol_position, settings.abs_tol_position, settings.abs_tol_velocity, settings.abs_tol_velocity,
      settings.abs_tol_mass, settings.abs_tol_costate_position, settings.abs_tol_costate_position,
      settings.abs_tol_costate_velocity, settings.abs_tol_costate_velocity, settings.abs_tol_costate_mass;
  const std::vector<double> times = sample_times(burn_time, sample_step);
  const OdeSamples<10> sol = integrate<10>(rhs, y0, 0.0, burn_time, times, tol, settings);

  Trajectory traj;
  traj.burn = burn;
  traj.samples.reserve(sol.times.size());
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    TrajectorySample sample = detail::annotate(sol.times[i], detail::unpack_state(sol.states[i]), c);
    const Costate p = detail::unpack_costate(sol.states[i]);
    const double pv = p.p_v.norm();
    if (!(pv > 0.0)) throw PropagationError(FailureKind::singular_costate, sample.time, "velocity costate vanished");
    sample.pitch = pitch_of_direction(p.p_v / pv, sample.kinematics.longitude);
    sample.costate = p;
    sample.hamiltonian = hamiltonian(sample.state, p, burn.thrust, burn.exhaust_velocity, c);
    traj.samples.push_back(sample);
  }
  return traj;
}

}  // namespace insertion

#pragma once

// Reduced optimal-thrust problem. Under the closed-loop pitch law the only
// unknowns left are the thrust level and the burn time, fixed by the two
// final apsis constraints. The initial costates then follow analytically
// from the ignition kinematics and the achieved final mass.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "astro.hpp"
#include "closed_loop.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "mission.hpp"
#include "newton.hpp"

namespace insertion {

struct InitialGuess {
  double thrust = 0.0;         // N
  double burn_time = 0.0;      // s
  double final_mass = 0.0;     // kg, rocket-equation estimate ignoring losses
  double initial_speed = 0.0;  // m/s
  double target_speed = 0.0;   // m/s, perigee speed of the target orbit
  bool degenerate = false;     // target speed not above the ignition speed
};

/// Output of either the closed-loop optimizer or a fixed-thrust shooting solve.
struct Solution {
  double thrust = 0.0;
  double burn_time = 0.0;
  double final_mass = 0.0;
  Costate initial_costate;
  Vec2 apsis_residuals = Vec2::Zero();  // achieved minus target, m
  std::vector<double> scaled_residuals;
  int iterations = 0;
  double velocity_losses = 0.0;  // m/s
  Trajectory trajectory;
  bool converged = false;
  std::string message;
};

/// Impulse-based guess: m_f = m0 exp(-(v_f - v0)/ve), T = m_f a_f,
/// t_f = (m0 - m_f) ve / T, with v_f the target perigee speed.
inline InitialGuess initial_guess(const MissionConfig& cfg) {
  const PolarKinematics k0 = cfg.initial_kinematics();
  InitialGuess g;
  g.initial_speed = k0.speed;
  g.target_speed = perigee_speed(cfg.target_orbit, cfg.constants);
  const double m0 = cfg.vehicle.initial_mass;
  const double ve = cfg.vehicle.exhaust_velocity;
  const double dv = g.target_speed - g.initial_speed;
  if (dv <= 0.0) {
    g.degenerate = true;
    g.final_mass = m0;
    g.thrust = m0 * cfg.final_acceleration();
    g.burn_time = 0.0;
    return g;
  }
  g.final_mass = m0 * std::exp(-dv / ve);
  g.thrust = g.final_mass * cfg.final_acceleration();
  g.burn_time = (m0 - g.final_mass) * ve / g.thrust;
  return g;
}

/// Costates at a state on a closed-loop optimal arc, for final mass m_f:
/// p_v = (m_f/ve) u, p_r = ω (m_f/ve) n, p_m = m_f/m.
inline Costate closed_loop_costate(const PolarKinematics& k, double mass, double final_mass, double exhaust_velocity,
                                   const Constants& c) {
  const PitchSolution pitch = closed_loop_pitch(k, c);
  const double pv = final_mass / exhaust_velocity;
  Costate p;
  p.p_v = pv * thrust_direction(pitch.theta, k.longitude);
  p.p_r = pitch.omega * pv * thrust_normal(pitch.theta, k.longitude);
  p.p_m = final_mass / mass;
  return p;
}

/// Analytic initial costates from the ignition kinematics.
inline Costate initial_costates(const PolarKinematics& k0, double final_mass, double initial_mass,
                                double exhaust_velocity, const Constants& c) {
  return closed_loop_costate(k0, initial_mass, final_mass, exhaust_velocity, c);
}

/// Gap between the delivered impulse ve ln(m0/m_f) and the achieved speed gain.
inline double velocity_losses(const Trajectory& traj) {
  const TrajectorySample& first = traj.initial();
  const TrajectorySample& last = traj.final();
  const double impulse = traj.burn.exhaust_velocity * std::log(first.state.mass / last.state.mass);
  return impulse - (last.kinematics.speed - first.kinematics.speed);
}

inline double velocity_losses(const Solution& sol) { return velocity_losses(sol.trajectory); }

inline Vec2 apsis_residuals(const TrajectorySample& final_sample, const OrbitSpec& target) {
  return {final_sample.apsides.apogee_altitude - target.apogee_altitude,
          final_sample.apsides.perigee_altitude - target.perigee_altitude};
}

inline Trajectory propagate_closed_loop(const MissionConfig& cfg, double thrust, double burn_time,
                                        double sample_step = 0.0) {
  return propagate_closed_loop(cfg.initial_state(), {thrust, cfg.vehicle.exhaust_velocity}, burn_time, cfg.constants,
                               cfg.integrator, sample_step);
}

/// Newton solve of the two apsis equations in (T, t_f) from `guess`.
/// Returns a Solution flagged `converged = false` when the iteration stalls;
/// throws if the guess itself cannot be propagated.
inline Solution optimize_thrust(const MissionConfig& cfg, double guess_thrust, double guess_burn_time,
                                double sample_step = 0.0) {
  cfg.validate();
  const OptimizerSettings& opt = cfg.optimizer;
  auto residual = [&](const Eigen::Vector2d& x) -> Eigen::Vector2d {
    const Trajectory traj = propagate_closed_loop(cfg, x[0], x[1]);
    return apsis_residuals(traj.final(), cfg.target_orbit) / 1e3;  // km
  };
  auto converged = [&](const Eigen::Vector2d& r) { return r.cwiseAbs().maxCoeff() * 1e3 < opt.tolerance; };
  auto project = [&](Eigen::Vector2d x) {
    x[0] = std::max(x[0], 1.0);
    x[1] = std::max(x[1], opt.min_burn_time);
    return x;
  };
  NewtonOptions options;
  options.max_iterations = opt.max_iterations;
  options.max_halvings = opt.max_halvings;
  options.fd_relative_step = opt.fd_relative_step;
  const NewtonResult<2> nr =
      damped_newton<2>(residual, Eigen::Vector2d(guess_thrust, guess_burn_time), options, converged, project);

  Solution sol;
  sol.thrust = nr.x[0];
  sol.burn_time = nr.x[1];
  sol.iterations = nr.iterations;
  sol.converged = nr.converged;
  sol.message = nr.message;
  sol.trajectory = propagate_closed_loop(cfg, sol.thrust, sol.burn_time, sample_step);
  sol.final_mass = sol.trajectory.final().state.mass;
  sol.apsis_residuals = apsis_residuals(sol.trajectory.final(), cfg.target_orbit);
  sol.scaled_residuals = {nr.residual[0], nr.residual[1]};
  sol.velocity_losses = velocity_losses(sol.trajectory);
  sol.initial_costate = initial_costates(cfg.initial_kinematics(), sol.final_mass, cfg.vehicle.initial_mass,
                                         cfg.vehicle.exhaust_velocity, cfg.constants);
  return sol;
}

inline Solution optimize_thrust(const MissionConfig& cfg, const InitialGuess& guess, double sample_step = 0.0) {
  return optimize_thrust(cfg, guess.thrust, guess.burn_time, sample_step);
}

inline Solution optimize_thrust(const MissionConfig& cfg) { return optimize_thrust(cfg, initial_guess(cfg)); }

}  // namespace insertion

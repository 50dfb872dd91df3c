#pragma once

// Mission description shared by the optimizer, the shooting solver and the CLI.
// All fields are SI; unit conversions happen only when reading or writing files.

#include <cmath>

#include "astro.hpp"
#include "errors.hpp"
#include "integrator.hpp"

namespace insertion {

struct VehicleParameters {
  double initial_mass = 40000.0;                 // kg
  double exhaust_velocity = 350.0 * 9.80665;     // m/s
};

/// Settings of the (T, t_f) Newton solve under the closed-loop law.
struct OptimizerSettings {
  double final_acceleration_g0 = 1.5;  // typical final acceleration for the guess, in g0
  double tolerance = 10.0;             // m, on both apsis residuals
  int max_iterations = 30;
  int max_halvings = 8;
  double fd_relative_step = 1e-3;
  double min_burn_time = 10.0;         // s
};

struct ShootingSettings {
  double tolerance = 1e-6;  // scaled residual norm
  int max_iterations = 50;
  int max_halvings = 10;
  double fd_relative_step = 1e-6;
  double fd_min_step = 1e-9;
  int max_bisections = 4;   // homotopy refinements before a sweep point is declared failed
};

struct SweepSettings {
  double thrust_min = 100e3;  // N
  double thrust_max = 230e3;  // N
  int points = 27;
  double max_step = 10e3;     // N, largest homotopy step for a single fixed-thrust solve
};

struct MissionConfig {
  Constants constants;
  VehicleParameters vehicle;
  OrbitSpec initial_orbit{400e3, -5000e3, deg_to_rad(169.0)};
  OrbitSpec target_orbit{36000e3, 250e3, std::nullopt};
  IntegratorSettings integrator;
  OptimizerSettings optimizer;
  ShootingSettings shooting;
  SweepSettings sweep;

  /// Upper stage to GTO: 40 t, Isp 350 s, ignition on a 400 x -5000 km
  /// fall-out orbit at 169 deg anomaly, target 36000 x 250 km.
  static MissionConfig gto_example() { return MissionConfig{}; }

  PolarKinematics initial_kinematics() const { return state_from_orbit(initial_orbit, constants); }
  CartesianState initial_state() const { return cartesian_from_polar(initial_kinematics(), vehicle.initial_mass); }
  double final_acceleration() const { return optimizer.final_acceleration_g0 * constants.g0; }

  void validate() const {
    constants.validate();
    if (!(vehicle.initial_mass > 0.0)) throw ValidationError("vehicle.m0 must be positive");
    if (!(vehicle.exhaust_velocity > 0.0)) throw ValidationError("vehicle exhaust velocity must be positive");
    if (!initial_orbit.true_anomaly) throw ValidationError("initial_orbit.anomaly_deg is required");
    if (initial_orbit.apogee_altitude < initial_orbit.perigee_altitude)
      throw ValidationError("initial_orbit.apogee_km must not be below perigee_km");
    if (!(constants.earth_radius + initial_orbit.perigee_altitude > 0.0))
      throw ValidationError("initial_orbit.perigee_km puts the perigee radius below zero");
    if (target_orbit.apogee_altitude < target_orbit.perigee_altitude)
      throw ValidationError("target_orbit.apogee_km must not be below perigee_km");
    if (!(constants.earth_radius + target_orbit.perigee_altitude > 0.0))
      throw ValidationError("target_orbit.perigee_km puts the perigee radius below zero");
    integrator.validate();
    if (!(optimizer.final_acceleration_g0 > 0.0)) throw ValidationError("solver.final_acceleration_g0 must be positive");
    if (!(optimizer.tolerance > 0.0)) throw ValidationError("solver.newton_tol_m must be positive");
    if (optimizer.max_iterations < 1) throw ValidationError("solver.newton_max_iter must be at least 1");
    if (optimizer.max_halvings < 0) throw ValidationError("solver.newton_max_halvings must be non-negative");
    if (!(optimizer.fd_relative_step > 0.0)) throw ValidationError("solver.newton_fd_step must be positive");
    if (!(shooting.tolerance > 0.0)) throw ValidationError("solver.shooting_tol must be positive");
    if (shooting.max_iterations < 1) throw ValidationError("solver.shooting_max_iter must be at least 1");
    if (!(shooting.fd_relative_step > 0.0)) throw ValidationError("solver.shooting_fd_step must be positive");
    if (!(sweep.thrust_min > 0.0)) throw ValidationError("sweep.t_min_kn must be positive");
    if (!(sweep.thrust_max >= sweep.thrust_min)) throw ValidationError("sweep.t_max_kn must not be below t_min_kn");
    if (sweep.points < 2) throw ValidationError("sweep.points must be at least 2");
    if (!(sweep.max_step > 0.0)) throw ValidationError("sweep.max_step_kn must be positive");
  }
};

}  // namespace insertion

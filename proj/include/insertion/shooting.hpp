#pragma once

// Indirect shooting for a fixed, generally non-optimal, thrust level.
//
// Unknowns: p_r(t0), p_v(t0), p_m(t0), t_f. Residuals:
//   1-2  final apogee / perigee altitude errors (km)
//   3-4  component of the final (p_r, p_v) outside span{∇ψ_A, ∇ψ_P}
//   5    p_m(t_f) - 1
//   6    H(t_f)
// Position quantities are measured in the time unit τ = sqrt(R_E³/μ), so the
// stacked costate is (τ p_r, p_v) and both halves have comparable size.

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "astro.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "mission.hpp"
#include "newton.hpp"
#include "optimizer.hpp"

namespace insertion {

struct ShootingUnknowns {
  Costate costate;
  double burn_time = 0.0;
};

using ShootingResiduals = Eigen::Matrix<double, 6, 1>;
using ConstraintGradients = Eigen::Matrix<double, 4, 2>;

inline double shooting_time_scale(const Constants& c) {
  return std::sqrt(c.earth_radius * c.earth_radius * c.earth_radius / c.mu);
}

/// Multiplier turning a Hamiltonian (kg/s) into a dimensionless residual.
inline double hamiltonian_scale(const MissionConfig& cfg) {
  return cfg.vehicle.exhaust_velocity / (cfg.vehicle.initial_mass * cfg.constants.g0);
}

/// Gradients of achieved apogee and perigee altitude with respect to
/// (x, y, vx, vy), by central differences (1 m, 1e-3 m/s).
inline ConstraintGradients constraint_gradients(const Vec2& position, const Vec2& velocity, const Constants& c) {
  ConstraintGradients g;
  constexpr double dr = 1.0, dv = 1e-3;
  for (int i = 0; i < 4; ++i) {
    Vec2 rp = position, rm = position, vp = velocity, vm = velocity;
    double h = 0.0;
    if (i < 2) {
      rp[i] += dr;
      rm[i] -= dr;
      h = dr;
    } else {
      vp[i - 2] += dv;
      vm[i - 2] -= dv;
      h = dv;
    }
    const Apsides plus = osculating_apsides(rp, vp, c);
    const Apsides minus = osculating_apsides(rm, vm, c);
    g(i, 0) = (plus.apogee_altitude - minus.apogee_altitude) / (2.0 * h);
    g(i, 1) = (plus.perigee_altitude - minus.perigee_altitude) / (2.0 * h);
  }
  return g;
}

/// Components of the final costate outside the span of the constraint gradients,
/// in the scaled metric, multiplied by ve/m0.
inline Vec2 transversality_defect(const TrajectorySample& final_sample, const MissionConfig& cfg) {
  const double tau = shooting_time_scale(cfg.constants);
  ConstraintGradients g =
      constraint_gradients(final_sample.state.position, final_sample.state.velocity, cfg.constants);
  g.topRows<2>() *= tau;
  const Eigen::Matrix4d q = Eigen::HouseholderQR<ConstraintGradients>(g).householderQ();
  Eigen::Vector4d p;
  p << tau * final_sample.costate->p_r, final_sample.costate->p_v;
  return q.rightCols<2>().transpose() * p * (cfg.vehicle.exhaust_velocity / cfg.vehicle.initial_mass);
}

namespace detail {

using ShootingVector = Eigen::Matrix<double, 6, 1>;

inline ShootingVector pack(const ShootingUnknowns& z, double tau) {
  ShootingVector x;
  x << tau * z.costate.p_r, z.costate.p_v, z.costate.p_m, z.burn_time / tau;
  return x;
}

inline ShootingUnknowns unpack(const ShootingVector& x, double tau) {
  ShootingUnknowns z;
  z.costate.p_r = Vec2(x[0], x[1]) / tau;
  z.costate.p_v = Vec2(x[2], x[3]);
  z.costate.p_m = x[4];
  z.burn_time = x[5] * tau;
  return z;
}

inline ShootingResiduals residuals_of(const Trajectory& traj, const MissionConfig& cfg) {
  const TrajectorySample& f = traj.final();
  ShootingResiduals r;
  r.head<2>() = apsis_residuals(f, cfg.target_orbit) / 1e3;
  r.segment<2>(2) = transversality_defect(f, cfg);
  r[4] = f.costate->p_m - 1.0;
  r[5] = f.hamiltonian->total * hamiltonian_scale(cfg);
  return r;
}

}  // namespace detail

inline Trajectory propagate_extremal(const MissionConfig& cfg, const ShootingUnknowns& z, double thrust,
                                     double sample_step = 0.0) {
  return propagate_extremal(cfg.initial_state(), z.costate, {thrust, cfg.vehicle.exhaust_velocity}, z.burn_time,
                            cfg.constants, cfg.integrator, sample_step);
}

inline ShootingResiduals shooting_residuals(const ShootingUnknowns& z, double thrust, const MissionConfig& cfg) {
  if (!(z.burn_time > 0.0)) throw DomainError("shooting_residuals: burn time must be positive");
  return detail::residuals_of(propagate_extremal(cfg, z, thrust), cfg);
}

/// Seed for a shooting solve taken from a converged solution (closed-loop or shooting).
inline ShootingUnknowns seed_from(const Solution& sol) { return {sol.initial_costate, sol.burn_time}; }

/// Damped Newton on the six shooting residuals at fixed thrust.
/// Non-convergence is reported through `converged = false` with the best iterate.
inline Solution solve_shooting(double thrust, const ShootingUnknowns& seed, const MissionConfig& cfg,
                               double sample_step = 0.0) {
  if (!(thrust > 0.0)) throw ValidationError("solve_shooting: thrust must be positive");
  const double tau = shooting_time_scale(cfg.constants);
  const ShootingSettings& s = cfg.shooting;
  auto f = [&](const detail::ShootingVector& x) {
    return shooting_residuals(detail::unpack(x, tau), thrust, cfg);
  };
  auto converged = [&](const ShootingResiduals& r) { return r.norm() < s.tolerance; };
  auto project = [&](detail::ShootingVector x) {
    x[5] = std::max(x[5], cfg.optimizer.min_burn_time / tau);
    return x;
  };
  NewtonOptions options;
  options.max_iterations = s.max_iterations;
  options.max_halvings = s.max_halvings;
  options.fd_relative_step = s.fd_relative_step;
  options.fd_min_step = s.fd_min_step;
  const NewtonResult<6> nr = damped_newton<6>(f, detail::pack(seed, tau), options, converged, project);

  Solution sol;
  const ShootingUnknowns z = detail::unpack(nr.x, tau);
  sol.thrust = thrust;
  sol.burn_time = z.burn_time;
  sol.initial_costate = z.costate;
  sol.iterations = nr.iterations;
  sol.converged = nr.converged;
  sol.message = nr.message;
  sol.trajectory = propagate_extremal(cfg, z, thrust, sample_step);
  sol.final_mass = sol.trajectory.final().state.mass;
  sol.apsis_residuals = apsis_residuals(sol.trajectory.final(), cfg.target_orbit);
  sol.scaled_residuals.assign(nr.residual.data(), nr.residual.data() + 6);
  sol.velocity_losses = velocity_losses(sol.trajectory);
  return sol;
}

/// Solves at `target` starting from the converged `from`; on failure the
/// thrust step is bisected toward the last converged level up to
/// `max_bisections` times.
inline std::optional<Solution> homotopy_step(const Solution& from, double target, const MissionConfig& cfg) {
  Solution current = from;
  double goal = target;
  int failures = 0;
  for (;;) {
    std::optional<Solution> s;
    try {
      s = solve_shooting(goal, seed_from(current), cfg);
    } catch (const Error&) {
      s.reset();
    }
    if (s && s->converged) {
      if (goal == target) return s;
      current = *s;
      goal = target;
      continue;
    }
    if (++failures > cfg.shooting.max_bisections) return std::nullopt;
    goal = 0.5 * (current.thrust + goal);
  }
}

/// Shooting solution at `thrust`, reached from `start` in uniform homotopy
/// steps no larger than `max_step`.
inline Solution continue_to_thrust(const Solution& start, double thrust, const MissionConfig& cfg, double max_step) {
  const double span = thrust - start.thrust;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / max_step - 1e-12)));
  Solution current = start;
  for (int i = 1; i <= steps; ++i) {
    const double t = i == steps ? thrust : start.thrust + span * i / steps;
    std::optional<Solution> next = homotopy_step(current, t, cfg);
    if (!next) {
      Solution failed = solve_shooting(t, seed_from(current), cfg);
      failed.message = "homotopy failed at " + std::to_string(t / 1e3) + " kN: " + failed.message;
      return failed;
    }
    current = std::move(*next);
  }
  return current;
}

/// Fixed-thrust solution seeded by the analytic costates of the closed-loop
/// optimum and continued to `thrust`.
inline Solution shoot_from_optimum(const Solution& optimum, double thrust, const MissionConfig& cfg) {
  Solution at_optimum = solve_shooting(optimum.thrust, seed_from(optimum), cfg);
  if (!at_optimum.converged) return at_optimum;
  return continue_to_thrust(at_optimum, thrust, cfg, cfg.sweep.max_step);
}

struct SweepRecord {
  double thrust = 0.0;
  bool converged = false;
  double final_mass = 0.0;
  double velocity_losses = 0.0;
  double burn_time = 0.0;
  Costate initial_costate;
  double h0_t0 = 0.0;    // kg/s
  double t_ht_t0 = 0.0;  // kg/s
  double residual_norm = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  double optimal_thrust = 0.0;
  std::size_t seed_index = 0;
  std::vector<std::string> warnings;

  std::size_t converged_count() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](auto& r) { return r.converged; }));
  }
};

inline SweepRecord record_of(const Solution& s) {
  SweepRecord r;
  r.thrust = s.thrust;
  r.converged = s.converged;
  r.final_mass = s.final_mass;
  r.velocity_losses = s.velocity_losses;
  r.burn_time = s.burn_time;
  r.initial_costate = s.initial_costate;
  const HamiltonianParts h = *s.trajectory.initial().hamiltonian;
  r.h0_t0 = h.h0;
  r.t_ht_t0 = s.thrust * h.ht;
  double sq = 0.0;
  for (double v : s.scaled_residuals) sq += v * v;
  r.residual_norm = std::sqrt(sq);
  return r;
}

/// Uniform thrust grid solved by homotopy: the grid point nearest the
/// closed-loop optimum is reached from the analytic costates, then two
/// warm-started chains march outward (run concurrently).
inline SweepResult sweep(double thrust_min, double thrust_max, int points, const MissionConfig& cfg,
                         const Solution& optimum) {
  if (points < 2) throw ValidationError("sweep: at least two points required");
  if (!(thrust_min > 0.0) || !(thrust_max > thrust_min)) throw ValidationError("sweep: invalid thrust range");
  SweepResult result;
  result.optimal_thrust = optimum.thrust;
  if (optimum.thrust < thrust_min || optimum.thrust > thrust_max)
    result.warnings.push_back("optimal thrust lies outside the sweep range");

  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = thrust_min + (thrust_max - thrust_min) * i / (points - 1);
  std::size_t seed = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - optimum.thrust) < std::abs(grid[seed] - optimum.thrust)) seed = i;
  result.seed_index = seed;
  result.records.resize(points);
  for (int i = 0; i < points; ++i) result.records[i].thrust = grid[i];

  const Solution first = shoot_from_optimum(optimum, grid[seed], cfg);
  if (!first.converged) {
    result.warnings.push_back("no convergence at the seed point: " + first.message);
    return result;
  }
  result.records[seed] = record_of(first);

  auto chain = [&](int direction) {
    std::vector<std::pair<std::size_t, SweepRecord>> out;
    Solution last = first;
    for (long i = static_cast<long>(seed) + direction; i >= 0 && i < points; i += direction) {
      if (std::optional<Solution> s = homotopy_step(last, grid[i], cfg)) {
        out.emplace_back(i, record_of(*s));
        last = std::move(*s);
      } else {
        SweepRecord failed;
        failed.thrust = grid[i];
        out.emplace_back(i, failed);
      }
    }
    return out;
  };
  auto up = std::async(std::launch::async, chain, +1);
  auto down = chain(-1);
  for (auto& [i, r] : up.get()) result.records[i] = r;
  for (auto& [i, r] : down) result.records[i] = r;
  return result;
}

inline SweepResult sweep(const MissionConfig& cfg, const Solution& optimum) {
  return sweep(cfg.sweep.thrust_min, cfg.sweep.thrust_max, cfg.sweep.points, cfg, optimum);
}

}  // namespace insertion

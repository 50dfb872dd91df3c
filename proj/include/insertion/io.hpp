#pragma once

// File formats written by the CLI. Tables are comma-separated with a single
// header line; summaries are JSON with a fixed key order. Output units:
// km for altitudes and positions, kN for thrust, deg for angles, kg for mass,
// kg/km, kg/(m/s) and kg/kg for costates, kg/s for Hamiltonian terms.

#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "astro.hpp"
#include "closed_loop.hpp"
#include "dynamics.hpp"
#include "mission.hpp"
#include "optimizer.hpp"
#include "shooting.hpp"

namespace insertion::io {

inline constexpr const char* kTrajectoryHeader =
    "time_s,altitude_km,speed_m_s,flight_path_angle_deg,pitch_deg,longitude_deg,apogee_km,perigee_km,mass_kg,"
    "x_km,y_km,vx_m_s,vy_m_s";
inline constexpr const char* kCostateColumns =
    ",p_rx_kg_km,p_ry_kg_km,p_vx_kg_m_s,p_vy_kg_m_s,p_m_kg_kg,h_kg_s,h0_kg_s,t_ht_kg_s";
inline constexpr const char* kSweepHeader =
    "thrust_kn,converged,final_mass_kg,dv_loss_m_s,burn_time_s,h0_t0_kg_s,t_ht_t0_kg_s,p_rx_kg_km,p_ry_kg_km,"
    "p_vx_kg_m_s,p_vy_kg_m_s,p_m_kg_kg";
inline constexpr const char* kPitchCurvesHeader = "ratio,theta_deg,f_plus_deg,f_minus_deg";

inline std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  std::string s = buf;
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline std::string sci(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, value);
  return buf;
}

inline std::string trajectory_csv(const Trajectory& traj, const Constants& c) {
  const bool with_costate = !traj.samples.empty() && traj.samples.front().costate.has_value();
  std::string out = kTrajectoryHeader;
  if (with_costate) out += kCostateColumns;
  out += '\n';
  for (const TrajectorySample& s : traj.samples) {
    const PolarKinematics& k = s.kinematics;
    out += fixed(s.time, 3) + ',' + fixed((k.radius - c.earth_radius) / 1e3, 4);
    out += ',' + fixed(k.speed, 4) + ',' + fixed(rad_to_deg(k.flight_path_angle), 6) + ',' +
           fixed(rad_to_deg(s.pitch), 6) + ',' + fixed(rad_to_deg(k.longitude), 6) + ',' +
           fixed(s.apsides.apogee_altitude / 1e3, 4) + ',' + fixed(s.apsides.perigee_altitude / 1e3, 4) + ',' +
           fixed(s.state.mass, 4) + ',' + fixed(s.state.position.x() / 1e3, 4) + ',' +
           fixed(s.state.position.y() / 1e3, 4) + ',' + fixed(s.state.velocity.x(), 4) + ',' +
           fixed(s.state.velocity.y(), 4);
    if (with_costate) {
      const Costate& p = *s.costate;
      const HamiltonianParts& h = *s.hamiltonian;
      out += ',' + sci(p.p_r.x() * 1e3, 9) + ',' + sci(p.p_r.y() * 1e3, 9) + ',' + sci(p.p_v.x(), 9) + ',' +
             sci(p.p_v.y(), 9) + ',' + sci(p.p_m, 9) + ',' + sci(h.total, 6) + ',' + sci(h.h0, 6) + ',' +
             sci(traj.burn.thrust * h.ht, 6);
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json costate_json(const Costate& p) {
  nlohmann::ordered_json j;
  j["p_r_kg_km"] = {p.p_r.x() * 1e3, p.p_r.y() * 1e3};
  j["p_v_kg_m_s"] = {p.p_v.x(), p.p_v.y()};
  j["p_m_kg_kg"] = p.p_m;
  j["si"] = {{"p_r_kg_m", {p.p_r.x(), p.p_r.y()}}, {"p_v_kg_m_s", {p.p_v.x(), p.p_v.y()}}, {"p_m", p.p_m}};
  return j;
}

inline nlohmann::ordered_json guess_json(const InitialGuess& g) {
  nlohmann::ordered_json j;
  j["thrust_kn"] = g.thrust / 1e3;
  j["burn_time_s"] = g.burn_time;
  j["final_mass_kg"] = g.final_mass;
  j["initial_speed_m_s"] = g.initial_speed;
  j["target_perigee_speed_m_s"] = g.target_speed;
  j["degenerate"] = g.degenerate;
  return j;
}

inline nlohmann::ordered_json solution_json(const Solution& s, const MissionConfig& cfg) {
  nlohmann::ordered_json j;
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  if (!s.message.empty()) j["message"] = s.message;
  j["thrust_kn"] = s.thrust / 1e3;
  j["burn_time_s"] = s.burn_time;
  j["final_mass_kg"] = s.final_mass;
  const TrajectorySample& f = s.trajectory.final();
  j["apogee_km"] = f.apsides.apogee_altitude / 1e3;
  j["perigee_km"] = f.apsides.perigee_altitude / 1e3;
  j["apsis_residuals_m"] = {s.apsis_residuals.x(), s.apsis_residuals.y()};
  j["scaled_residuals"] = s.scaled_residuals;
  j["total_impulse_m_s"] = cfg.vehicle.exhaust_velocity * std::log(cfg.vehicle.initial_mass / s.final_mass);
  j["velocity_losses_m_s"] = s.velocity_losses;
  j["initial_costate"] = costate_json(s.initial_costate);
  const TrajectorySample& i = s.trajectory.initial();
  if (i.hamiltonian) {
    j["hamiltonian_t0"] = {{"h0_kg_s", i.hamiltonian->h0}, {"t_ht_kg_s", s.thrust * i.hamiltonian->ht}};
  }
  return j;
}

inline nlohmann::ordered_json ignition_json(const MissionConfig& cfg) {
  const PolarKinematics k = cfg.initial_kinematics();
  const PitchSolution p = closed_loop_pitch(k, cfg.constants);
  nlohmann::ordered_json j;
  j["radius_km"] = k.radius / 1e3;
  j["altitude_km"] = (k.radius - cfg.constants.earth_radius) / 1e3;
  j["speed_m_s"] = k.speed;
  j["flight_path_angle_deg"] = rad_to_deg(k.flight_path_angle);
  j["longitude_deg"] = rad_to_deg(k.longitude);
  j["pitch_deg"] = rad_to_deg(p.theta);
  j["pitch_bound_deg"] = rad_to_deg(p.theta_max);
  j["omega_deg_s"] = rad_to_deg(p.omega);
  j["exhaust_velocity_m_s"] = cfg.vehicle.exhaust_velocity;
  return j;
}

inline std::string sweep_csv(const SweepResult& sweep) {
  std::string out = std::string(kSweepHeader) + '\n';
  for (const SweepRecord& r : sweep.records) {
    out += fixed(r.thrust / 1e3, 4) + ',' + (r.converged ? "1" : "0");
    if (r.converged) {
      const Costate& p = r.initial_costate;
      out += ',' + fixed(r.final_mass, 4) + ',' + fixed(r.velocity_losses, 4) + ',' + fixed(r.burn_time, 4) + ',' +
             sci(r.h0_t0, 9) + ',' + sci(r.t_ht_t0, 9) + ',' + sci(p.p_r.x() * 1e3, 9) + ',' +
             sci(p.p_r.y() * 1e3, 9) + ',' + sci(p.p_v.x(), 9) + ',' + sci(p.p_v.y(), 9) + ',' + sci(p.p_m, 9);
    } else {
      out += ",,,,,,,,,,";
    }
    out += '\n';
  }
  return out;
}

/// F⁺ and F⁻ over a θ grid spanning (-θ_m, θ_m) for each velocity ratio v_c/v.
inline std::string pitch_curves_csv(std::span<const double> ratios, int samples) {
  if (samples < 2) throw ValidationError("pitch-curves: samples must be at least 2");
  std::string out = std::string(kPitchCurvesHeader) + '\n';
  for (double ratio : ratios) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) throw ValidationError("pitch-curves: ratios must be positive");
    const double theta_m = pitch_bound(ratio) * (1.0 - 1e-9);
    for (int i = 0; i < samples; ++i) {
      const double theta = -theta_m + 2.0 * theta_m * i / (samples - 1);
      out += fixed(ratio, 6) + ',' + fixed(rad_to_deg(theta), 6) + ',';
      try {
        out += fixed(rad_to_deg(eval_branch(theta, Branch::plus, ratio)), 6);
      } catch (const DomainError&) {
      }
      out += ',';
      try {
        out += fixed(rad_to_deg(eval_branch(theta, Branch::minus, ratio)), 6);
      } catch (const DomainError&) {
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace insertion::io

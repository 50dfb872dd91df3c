#pragma once

// Mission configuration files (JSON). Every block except `vehicle`,
// `initial_orbit` and `target_orbit` is optional and falls back to the
// defaults of MissionConfig. Unknown keys are rejected so typos surface.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "astro.hpp"
#include "errors.hpp"
#include "mission.hpp"

namespace insertion {

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& block, const std::string& name, std::initializer_list<std::string_view> keys) {
  if (!block.is_object()) throw ValidationError(name + " must be an object");
  for (const auto& item : block.items()) {
    bool known = false;
    for (auto k : keys) known = known || item.key() == k;
    if (!known) throw ValidationError("unknown field " + name + "." + item.key());
  }
}

inline double number_field(const json& block, const std::string& block_name, const char* key) {
  const json& v = block.at(key);
  if (!v.is_number()) throw ValidationError(block_name + "." + key + " must be a number");
  return v.get<double>();
}

inline void read_number(const json& block, const std::string& block_name, const char* key, double& out,
                        double scale = 1.0) {
  if (block.contains(key)) out = number_field(block, block_name, key) * scale;
}

inline void read_int(const json& block, const std::string& block_name, const char* key, int& out) {
  if (!block.contains(key)) return;
  const json& v = block.at(key);
  if (!v.is_number_integer()) throw ValidationError(block_name + "." + key + " must be an integer");
  out = v.get<int>();
}

inline double required_number(const json& block, const std::string& block_name, const char* key, double scale = 1.0) {
  if (!block.contains(key)) throw ValidationError("missing field " + block_name + "." + key);
  return number_field(block, block_name, key) * scale;
}

inline const json& required_block(const json& root, const char* name) {
  if (!root.contains(name)) throw ValidationError(std::string("missing block ") + name);
  return root.at(name);
}

inline std::string line_info(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace detail

inline MissionConfig parse_config(std::string_view text, const std::string& source = "<config>") {
  using detail::json;
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": parse error at " + detail::line_info(text, e.byte) + ": " + e.what());
  }
  if (!root.is_object()) throw ValidationError(source + ": top level must be an object");
  detail::reject_unknown_keys(root, "config",
                              {"constants", "vehicle", "initial_orbit", "target_orbit", "solver", "sweep"});

  MissionConfig cfg = MissionConfig::gto_example();

  if (root.contains("constants")) {
    const json& b = root.at("constants");
    detail::reject_unknown_keys(b, "constants", {"mu", "earth_radius_m", "g0"});
    detail::read_number(b, "constants", "mu", cfg.constants.mu);
    detail::read_number(b, "constants", "earth_radius_m", cfg.constants.earth_radius);
    detail::read_number(b, "constants", "g0", cfg.constants.g0);
  }

  {
    const json& b = detail::required_block(root, "vehicle");
    detail::reject_unknown_keys(b, "vehicle", {"m0_kg", "isp_s", "ve_m_s"});
    cfg.vehicle.initial_mass = detail::required_number(b, "vehicle", "m0_kg");
    const bool has_isp = b.contains("isp_s"), has_ve = b.contains("ve_m_s");
    if (has_isp == has_ve) throw ValidationError("vehicle: exactly one of isp_s or ve_m_s is required");
    if (has_isp) {
      const double isp = detail::number_field(b, "vehicle", "isp_s");
      if (!(isp > 0.0)) throw ValidationError("vehicle.isp_s must be positive");
      cfg.vehicle.exhaust_velocity = isp * cfg.constants.g0;
    } else {
      cfg.vehicle.exhaust_velocity = detail::number_field(b, "vehicle", "ve_m_s");
    }
  }

  {
    const json& b = detail::required_block(root, "initial_orbit");
    detail::reject_unknown_keys(b, "initial_orbit", {"apogee_km", "perigee_km", "anomaly_deg"});
    cfg.initial_orbit.apogee_altitude = detail::required_number(b, "initial_orbit", "apogee_km", 1e3);
    cfg.initial_orbit.perigee_altitude = detail::required_number(b, "initial_orbit", "perigee_km", 1e3);
    cfg.initial_orbit.true_anomaly = deg_to_rad(detail::required_number(b, "initial_orbit", "anomaly_deg"));
  }

  {
    const json& b = detail::required_block(root, "target_orbit");
    detail::reject_unknown_keys(b, "target_orbit", {"apogee_km", "perigee_km"});
    cfg.target_orbit.apogee_altitude = detail::required_number(b, "target_orbit", "apogee_km", 1e3);
    cfg.target_orbit.perigee_altitude = detail::required_number(b, "target_orbit", "perigee_km", 1e3);
    cfg.target_orbit.true_anomaly.reset();
  }

  if (root.contains("solver")) {
    const json& b = root.at("solver");
    detail::reject_unknown_keys(
        b, "solver",
        {"integrator", "rel_tol", "abs_tol_position_m", "abs_tol_velocity_m_s", "abs_tol_mass_kg", "fixed_step_s",
         "final_acceleration_g0", "newton_tol_m", "newton_max_iter", "newton_max_halvings", "newton_fd_step",
         "shooting_tol", "shooting_max_iter", "shooting_fd_step", "shooting_max_bisections"});
    if (b.contains("integrator")) {
      const json& v = b.at("integrator");
      if (v == "dopri54")
        cfg.integrator.method = IntegratorMethod::dopri54;
      else if (v == "rk4")
        cfg.integrator.method = IntegratorMethod::rk4;
      else
        throw ValidationError("solver.integrator must be \"dopri54\" or \"rk4\"");
    }
    detail::read_number(b, "solver", "rel_tol", cfg.integrator.rel_tol);
    detail::read_number(b, "solver", "abs_tol_position_m", cfg.integrator.abs_tol_position);
    detail::read_number(b, "solver", "abs_tol_velocity_m_s", cfg.integrator.abs_tol_velocity);
    detail::read_number(b, "solver", "abs_tol_mass_kg", cfg.integrator.abs_tol_mass);
    detail::read_number(b, "solver", "fixed_step_s", cfg.integrator.fixed_step);
    detail::read_number(b, "solver", "final_acceleration_g0", cfg.optimizer.final_acceleration_g0);
    detail::read_number(b, "solver", "newton_tol_m", cfg.optimizer.tolerance);
    detail::read_int(b, "solver", "newton_max_iter", cfg.optimizer.max_iterations);
    detail::read_int(b, "solver", "newton_max_halvings", cfg.optimizer.max_halvings);
    detail::read_number(b, "solver", "newton_fd_step", cfg.optimizer.fd_relative_step);
    detail::read_number(b, "solver", "shooting_tol", cfg.shooting.tolerance);
    detail::read_int(b, "solver", "shooting_max_iter", cfg.shooting.max_iterations);
    detail::read_number(b, "solver", "shooting_fd_step", cfg.shooting.fd_relative_step);
    detail::read_int(b, "solver", "shooting_max_bisections", cfg.shooting.max_bisections);
  }

  if (root.contains("sweep")) {
    const json& b = root.at("sweep");
    detail::reject_unknown_keys(b, "sweep", {"t_min_kn", "t_max_kn", "points", "max_step_kn"});
    detail::read_number(b, "sweep", "t_min_kn", cfg.sweep.thrust_min, 1e3);
    detail::read_number(b, "sweep", "t_max_kn", cfg.sweep.thrust_max, 1e3);
    detail::read_int(b, "sweep", "points", cfg.sweep.points);
    detail::read_number(b, "sweep", "max_step_kn", cfg.sweep.max_step, 1e3);
  }

  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return cfg;
}

inline MissionConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace insertion

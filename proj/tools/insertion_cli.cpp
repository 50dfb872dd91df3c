// Command-line driver: optimize / shoot / sweep / pitch-curves.
//
// Exit codes: 0 success, 1 validation error, 2 solver non-convergence,
// 3 propagation or physics error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <insertion/insertion.hpp>

namespace fs = std::filesystem;
using namespace insertion;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitPhysics = 3;

constexpr const char* kConfigDirEnv = "INSERTION_CONFIG_DIR";
constexpr const char* kDefaultConfigName = "gto_example.json";

struct Options {
  std::string config;
  std::string out_dir = ".";
};

MissionConfig resolve_config(const Options& opt) {
  if (!opt.config.empty()) return load_config(opt.config);
  if (const char* dir = std::getenv(kConfigDirEnv); dir && *dir) return load_config(fs::path(dir) / kDefaultConfigName);
  return MissionConfig::gto_example();
}

void write_file(const Options& opt, const std::string& name, const std::string& content) {
  const fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
  std::cout << "wrote " << path.string() << '\n';
}

void write_json(const Options& opt, const std::string& name, const nlohmann::ordered_json& j) {
  write_file(opt, name, j.dump(2) + '\n');
}

int cmd_optimize(const Options& opt, bool guess_only) {
  const MissionConfig cfg = resolve_config(opt);
  const InitialGuess guess = initial_guess(cfg);
  nlohmann::ordered_json summary;
  summary["command"] = guess_only ? "optimize --guess-only" : "optimize";
  summary["ignition"] = io::ignition_json(cfg);
  summary["initial_guess"] = io::guess_json(guess);

  if (guess_only) {
    const Trajectory traj = propagate_closed_loop(cfg, guess.thrust, guess.burn_time, 1.0);
    const Apsides& a = traj.final().apsides;
    summary["initial_guess"]["apogee_km"] = a.apogee_altitude / 1e3;
    summary["initial_guess"]["perigee_km"] = a.perigee_altitude / 1e3;
    summary["initial_guess"]["initial_costate"] =
        io::costate_json(initial_costates(cfg.initial_kinematics(), guess.final_mass, cfg.vehicle.initial_mass,
                                          cfg.vehicle.exhaust_velocity, cfg.constants));
    write_json(opt, "guess_summary.json", summary);
    write_file(opt, "guess_trajectory.csv", io::trajectory_csv(traj, cfg.constants));
    std::printf("guess: T = %.3f kN, t_f = %.1f s, m_f = %.1f kg -> apogee %.1f km, perigee %.1f km\n",
                guess.thrust / 1e3, guess.burn_time, guess.final_mass, a.apogee_altitude / 1e3,
                a.perigee_altitude / 1e3);
    return 0;
  }

  const Solution sol = optimize_thrust(cfg, guess, 1.0);
  summary["solution"] = io::solution_json(sol, cfg);
  write_json(opt, "optimize_summary.json", summary);
  write_file(opt, "optimize_trajectory.csv", io::trajectory_csv(sol.trajectory, cfg.constants));
  std::printf("optimum: T = %.3f kN, t_f = %.2f s, m_f = %.1f kg, residuals (%.3f, %.3f) m, %d iterations\n",
              sol.thrust / 1e3, sol.burn_time, sol.final_mass, sol.apsis_residuals.x(), sol.apsis_residuals.y(),
              sol.iterations);
  if (!sol.converged) {
    std::fprintf(stderr, "optimize: no convergence (%s)\n", sol.message.c_str());
    return kExitNoConvergence;
  }
  return 0;
}

// Closed-loop optimum used to seed the shooting commands.
std::optional<Solution> seed_optimum(const MissionConfig& cfg, const char* command) {
  Solution optimum = optimize_thrust(cfg);
  if (!optimum.converged) {
    std::fprintf(stderr, "%s: closed-loop optimum did not converge (%s)\n", command, optimum.message.c_str());
    return std::nullopt;
  }
  return optimum;
}

int cmd_shoot(const Options& opt, double thrust_kn) {
  if (!(thrust_kn > 0.0)) throw ValidationError("--thrust-kn must be positive");
  const MissionConfig cfg = resolve_config(opt);
  const std::optional<Solution> optimum = seed_optimum(cfg, "shoot");
  if (!optimum) return kExitNoConvergence;
  const Solution sol = shoot_from_optimum(*optimum, thrust_kn * 1e3, cfg);
  const Trajectory traj = propagate_extremal(cfg, seed_from(sol), sol.thrust, 1.0);

  nlohmann::ordered_json summary;
  summary["command"] = "shoot";
  summary["requested_thrust_kn"] = thrust_kn;
  summary["closed_loop_optimum"] = {{"thrust_kn", optimum->thrust / 1e3},
                                    {"burn_time_s", optimum->burn_time},
                                    {"final_mass_kg", optimum->final_mass}};
  summary["solution"] = io::solution_json(sol, cfg);
  write_json(opt, "shoot_summary.json", summary);
  write_file(opt, "shoot_trajectory.csv", io::trajectory_csv(traj, cfg.constants));
  std::printf("shoot: T = %.3f kN, converged = %s, t_f = %.2f s, m_f = %.2f kg, dV losses = %.2f m/s\n",
              sol.thrust / 1e3, sol.converged ? "yes" : "no", sol.burn_time, sol.final_mass, sol.velocity_losses);
  if (!sol.converged) {
    std::fprintf(stderr, "shoot: no convergence (%s)\n", sol.message.c_str());
    return kExitNoConvergence;
  }
  return 0;
}

int cmd_sweep(const Options& opt) {
  const MissionConfig cfg = resolve_config(opt);
  const std::optional<Solution> optimum = seed_optimum(cfg, "sweep");
  if (!optimum) return kExitNoConvergence;
  const SweepResult result = sweep(cfg, *optimum);
  for (const std::string& w : result.warnings) std::fprintf(stderr, "sweep: warning: %s\n", w.c_str());
  write_file(opt, "sweep.csv", io::sweep_csv(result));
  const std::size_t ok = result.converged_count();
  std::printf("sweep: %zu/%zu thrust levels converged\n", ok, result.records.size());
  // at least 80% of the grid must converge
  return 5 * ok >= 4 * result.records.size() ? 0 : kExitNoConvergence;
}

int cmd_pitch_curves(const Options& opt, const std::vector<double>& ratios, int samples) {
  write_file(opt, "pitch_curves.csv", io::pitch_curves_csv(ratios, samples));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-fuel orbit insertion with a constantly thrusting upper stage"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config,
                 "Mission configuration (JSON); defaults to $INSERTION_CONFIG_DIR/" + std::string(kDefaultConfigName) +
                     ", then to the built-in GTO example");
  app.add_option("--out", opt.out_dir, "Output directory")->capture_default_str();

  auto* optimize = app.add_subcommand("optimize", "Optimal thrust level and burn time under the closed-loop law");
  optimize->fallthrough();
  bool guess_only = false;
  optimize->add_flag("--guess-only", guess_only, "Only evaluate and propagate the initial guess");

  auto* shoot = app.add_subcommand("shoot", "Fixed-thrust indirect shooting, continued from the optimum");
  shoot->fallthrough();
  double thrust_kn = 0.0;
  shoot->add_option("--thrust-kn", thrust_kn, "Thrust level (kN)")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Shooting solutions over the configured thrust range");
  sweep_cmd->fallthrough();

  auto* curves = app.add_subcommand("pitch-curves", "Tabulate the pitch-law branch functions F+ and F-");
  curves->fallthrough();
  std::vector<double> ratios{0.7, 1.0, 1.5};
  int samples = 201;
  curves->add_option("--ratios", ratios, "Velocity ratios v_c/v")->delimiter(',')->capture_default_str();
  curves->add_option("--samples", samples, "Samples per ratio")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*optimize) return cmd_optimize(opt, guess_only);
    if (*shoot) return cmd_shoot(opt, thrust_kn);
    if (*sweep_cmd) return cmd_sweep(opt);
    if (*curves) return cmd_pitch_curves(opt, ratios, samples);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNoConvergence;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", to_string(e.kind()), e.what());
    return kExitPhysics;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitPhysics;
  }
  return kExitValidation;
}

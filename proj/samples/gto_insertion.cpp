// Optimal thrust level for the upper-stage GTO insertion, then a fixed-thrust
// shooting solve at 100 kN seeded by the analytic costates.

#include <cstdio>

#include <insertion/insertion.hpp>

int main() {
  using namespace insertion;
  const MissionConfig cfg = MissionConfig::gto_example();

  const InitialGuess guess = initial_guess(cfg);
  std::printf("guess:   T = %.3f kN  t_f = %.1f s  m_f = %.1f kg\n", guess.thrust / 1e3, guess.burn_time,
              guess.final_mass);

  const Solution opt = optimize_thrust(cfg, guess);
  std::printf("optimum: T = %.3f kN  t_f = %.2f s  m_f = %.1f kg  (%d iterations)\n", opt.thrust / 1e3,
              opt.burn_time, opt.final_mass, opt.iterations);
  const Costate& p = opt.initial_costate;
  std::printf("costate: p_r = (%.4f, %.4f) kg/km  p_v = (%.4f, %.4f) kg/(m/s)  p_m = %.4f\n", p.p_r.x() * 1e3,
              p.p_r.y() * 1e3, p.p_v.x(), p.p_v.y(), p.p_m);

  const Solution low = shoot_from_optimum(opt, 100e3, cfg);
  std::printf("100 kN:  converged = %d  m_f = %.1f kg  dV losses = %.1f m/s\n", low.converged ? 1 : 0,
              low.final_mass, low.velocity_losses);
  return low.converged ? 0 : 1;
}

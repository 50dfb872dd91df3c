#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <insertion/insertion.hpp>

using namespace insertion;

namespace {

const MissionConfig& mission() {
  static const MissionConfig cfg = MissionConfig::gto_example();
  return cfg;
}

const Solution& optimum() {
  static const Solution sol = optimize_thrust(mission());
  return sol;
}

const Solution& shooting_at_optimum() {
  static const Solution sol = solve_shooting(optimum().thrust, seed_from(optimum()), mission());
  return sol;
}

const SweepResult& default_sweep() {
  static const SweepResult result = sweep(mission(), optimum());
  return result;
}

struct RandomOrbit {
  Vec2 position;
  Vec2 velocity;
};

RandomOrbit random_elliptic_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> perigee(200e3, 2000e3), span(100e3, 40000e3), anomaly(-3.0, 3.0);
  const double hp = perigee(rng);
  const CartesianState s =
      cartesian_from_polar(state_from_orbit({hp + span(rng), hp, anomaly(rng)}, mission().constants), 1.0);
  return {s.position, s.velocity};
}

Eigen::Vector4d apsides_vector(const Vec2& r, const Vec2& v) {
  const Apsides a = osculating_apsides(r, v, mission().constants);
  return {a.apogee_altitude, a.perigee_altitude, 0.0, 0.0};
}

}  // namespace

TEST(ConstraintGradients, MatchFiniteDifferencesWithWiderSteps) {
  std::mt19937_64 rng(1);
  const Constants& c = mission().constants;
  for (int i = 0; i < 100; ++i) {
    const RandomOrbit o = random_elliptic_state(rng);
    const ConstraintGradients g = constraint_gradients(o.position, o.velocity, c);
    for (int k = 0; k < 4; ++k) {
      const double h = k < 2 ? 10.0 : 1e-2;
      Vec2 rp = o.position, rm = o.position, vp = o.velocity, vm = o.velocity;
      if (k < 2) {
        rp[k] += h;
        rm[k] -= h;
      } else {
        vp[k - 2] += h;
        vm[k - 2] -= h;
      }
      const Eigen::Vector4d d = (apsides_vector(rp, vp) - apsides_vector(rm, vm)) / (2.0 * h);
      for (int j = 0; j < 2; ++j) {
        const double scale = g.row(k).cwiseAbs().maxCoeff();
        EXPECT_NEAR(g(k, j), d[j], 1e-4 * scale + 1e-9) << "state " << i << " row " << k;
      }
    }
  }
}

TEST(ConstraintGradients, RotationEquivariant) {
  std::mt19937_64 rng(2);
  const Constants& c = mission().constants;
  for (int i = 0; i < 20; ++i) {
    const RandomOrbit o = random_elliptic_state(rng);
    const Eigen::Rotation2Dd rot(0.1 + 0.3 * i);
    const Mat2 m = rot.toRotationMatrix();
    const ConstraintGradients g = constraint_gradients(o.position, o.velocity, c);
    const ConstraintGradients gr = constraint_gradients(m * o.position, m * o.velocity, c);
    for (int j = 0; j < 2; ++j) {
      const Vec2 dr = m * g.col(j).head<2>(), dv = m * g.col(j).tail<2>();
      EXPECT_LT((gr.col(j).head<2>() - dr).norm(), 1e-5 * (dr.norm() + 1e-12));
      EXPECT_LT((gr.col(j).tail<2>() - dv).norm(), 1e-5 * dv.norm());
    }
  }
}

TEST(ConstraintGradients, TaylorRemainderIsSecondOrder) {
  std::mt19937_64 rng(3);
  const Constants& c = mission().constants;
  const RandomOrbit o = random_elliptic_state(rng);
  const ConstraintGradients g = constraint_gradients(o.position, o.velocity, c);
  const Eigen::Vector4d dir(300.0, -200.0, 0.3, 0.2);
  const Eigen::Vector4d f0 = apsides_vector(o.position, o.velocity);
  auto remainder = [&](double eps) {
    const Eigen::Vector4d f = apsides_vector(o.position + eps * dir.head<2>(), o.velocity + eps * dir.tail<2>());
    return std::abs(f[0] - f0[0] - eps * g.col(0).dot(dir));
  };
  const double ratio = remainder(1.0) / remainder(0.5);
  EXPECT_NEAR(ratio, 4.0, 0.5);
}

TEST(Residuals, AnalyticSeedKeepsHamiltonianZero) {
  // H vanishes at ignition by construction and is conserved along any extremal.
  const Solution& opt = optimum();
  const Trajectory traj = propagate_extremal(mission(), seed_from(opt), opt.thrust);
  EXPECT_NEAR(traj.initial().hamiltonian->total * hamiltonian_scale(mission()), 0.0, 1e-9);
  EXPECT_NEAR(traj.final().hamiltonian->total * hamiltonian_scale(mission()), 0.0, 1e-8);
}

TEST(Residuals, AnalyticSeedIsCloseButNotExact) {
  // The closed-loop law is a close approximation of the extremal, so the
  // residuals at its costates are small compared to an arbitrary seed yet
  // well above the shooting tolerance.
  const Solution& opt = optimum();
  const ShootingResiduals r = shooting_residuals(seed_from(opt), opt.thrust, mission());
  EXPECT_LT(std::abs(r[4]), 0.05);
  EXPECT_LT(std::abs(r[5]), 1e-6);
  EXPECT_GT(r.norm(), mission().shooting.tolerance);

  ShootingUnknowns arbitrary = seed_from(opt);
  arbitrary.costate.p_r = Vec2::Zero();
  EXPECT_GT(shooting_residuals(arbitrary, opt.thrust, mission()).norm(), 10.0 * r.norm());
}

TEST(Residuals, CostateScalingActsOnTransversalityOnly) {
  const Solution& opt = optimum();
  const double lambda = 1.7;
  ShootingUnknowns z = seed_from(opt);
  const ShootingResiduals r1 = shooting_residuals(z, opt.thrust, mission());
  z.costate = z.costate.scaled(lambda);
  const ShootingResiduals r2 = shooting_residuals(z, opt.thrust, mission());
  EXPECT_NEAR(r2[0], r1[0], 1e-6);
  EXPECT_NEAR(r2[1], r1[1], 1e-6);
  EXPECT_NEAR(r2[2], lambda * r1[2], 1e-9);
  EXPECT_NEAR(r2[3], lambda * r1[3], 1e-9);
  EXPECT_NEAR(r2[4] + 1.0, lambda * (r1[4] + 1.0), 1e-9);
}

TEST(Residuals, NonPositiveBurnTimeIsRejected) {
  ShootingUnknowns z = seed_from(optimum());
  z.burn_time = 0.0;
  EXPECT_THROW(shooting_residuals(z, optimum().thrust, mission()), DomainError);
  EXPECT_THROW(solve_shooting(0.0, seed_from(optimum()), mission()), ValidationError);
}

TEST(Shooting, ConvergesAtOptimalThrust) {
  const Solution& s = shooting_at_optimum();
  ASSERT_TRUE(s.converged) << s.message;
  EXPECT_NEAR(s.final_mass, 7898.4, 0.001 * 7898.4);
  EXPECT_NEAR(s.final_mass, optimum().final_mass, 0.001 * optimum().final_mass);
  EXPECT_LT(s.apsis_residuals.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_LE(s.iterations, 10);
}

TEST(Shooting, ConvergedSolutionSatisfiesOptimalityConditions) {
  const Solution& s = shooting_at_optimum();
  const MissionConfig& cfg = mission();
  const Trajectory traj = propagate_extremal(cfg, seed_from(s), s.thrust, 1.0);
  const TrajectorySample& f = traj.final();
  EXPECT_NEAR(f.costate->p_m, 1.0, 1e-6);
  EXPECT_LT(transversality_defect(f, cfg).norm(), 1e-6);
  for (const TrajectorySample& x : traj.samples)
    EXPECT_NEAR(x.hamiltonian->total * hamiltonian_scale(cfg), 0.0, 1e-6) << "t = " << x.time;
}

TEST(Shooting, NotWorseThanClosedLoopAtSameThrust) {
  EXPECT_GE(shooting_at_optimum().final_mass, optimum().final_mass - 1e-3);
}

TEST(Shooting, HomotopyReachesRangeEnds) {
  const Solution low = shoot_from_optimum(optimum(), 100e3, mission());
  const Solution high = shoot_from_optimum(optimum(), 230e3, mission());
  ASSERT_TRUE(low.converged) << low.message;
  ASSERT_TRUE(high.converged) << high.message;
  EXPECT_LT(low.final_mass, shooting_at_optimum().final_mass);
  EXPECT_LT(high.final_mass, shooting_at_optimum().final_mass);
  EXPECT_DOUBLE_EQ(low.thrust, 100e3);
  EXPECT_DOUBLE_EQ(high.thrust, 230e3);
}

TEST(Shooting, ThrustPerturbationLosesMass) {
  for (double factor : {0.98, 1.02}) {
    const Solution s = shoot_from_optimum(optimum(), factor * optimum().thrust, mission());
    ASSERT_TRUE(s.converged) << s.message;
    EXPECT_LT(s.final_mass, shooting_at_optimum().final_mass) << "factor " << factor;
  }
}

TEST(Shooting, SwitchingFunctionDiscriminatesOffOptimum) {
  const double tol = 1e-6;
  const double scale = hamiltonian_scale(mission());
  for (double thrust : {100e3, 120e3, 145e3, 230e3}) {
    const Solution s = shoot_from_optimum(optimum(), thrust, mission());
    ASSERT_TRUE(s.converged);
    EXPECT_GT(std::abs(thrust * s.trajectory.initial().hamiltonian->ht) * scale, 10.0 * tol) << thrust;
  }
}

TEST(Sweep, AllPointsConverge) {
  const SweepResult& r = default_sweep();
  ASSERT_EQ(r.records.size(), 27u);
  EXPECT_EQ(r.converged_count(), 27u);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Sweep, BestMassAtGridPointNearestOptimum) {
  const SweepResult& r = default_sweep();
  const auto best = std::max_element(r.records.begin(), r.records.end(),
                                     [](auto& a, auto& b) { return a.final_mass < b.final_mass; });
  EXPECT_EQ(static_cast<std::size_t>(best - r.records.begin()), r.seed_index);
  EXPECT_NEAR(r.records[r.seed_index].thrust, 130e3, 1e-6);
}

TEST(Sweep, LeastLossesAtGridPointNearestOptimum) {
  const SweepResult& r = default_sweep();
  const auto least = std::min_element(r.records.begin(), r.records.end(),
                                      [](auto& a, auto& b) { return a.velocity_losses < b.velocity_losses; });
  EXPECT_EQ(static_cast<std::size_t>(least - r.records.begin()), r.seed_index);
}

TEST(Sweep, HamiltonianVanishesAtIgnition) {
  const double scale = hamiltonian_scale(mission());
  for (const SweepRecord& rec : default_sweep().records)
    EXPECT_LT(std::abs(rec.h0_t0 + rec.t_ht_t0) * scale, 1e-6) << rec.thrust;
}

TEST(Sweep, ComponentsSmallestNearOptimum) {
  const SweepResult& r = default_sweep();
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    if (i == r.seed_index) continue;
    EXPECT_GT(std::abs(r.records[i].h0_t0), std::abs(r.records[r.seed_index].h0_t0));
    EXPECT_GT(std::abs(r.records[i].t_ht_t0), std::abs(r.records[r.seed_index].t_ht_t0));
  }
}

TEST(Sweep, CostatesEvolveSmoothly) {
  // No step between adjacent rows exceeds 10x the median step of its
  // neighbourhood, and each component has at most one extremum.
  const SweepResult& r = default_sweep();
  auto component = [](const SweepRecord& rec, int k) {
    const Costate& p = rec.initial_costate;
    const double v[5] = {p.p_r.x(), p.p_r.y(), p.p_v.x(), p.p_v.y(), p.p_m};
    return v[k];
  };
  for (int k = 0; k < 5; ++k) {
    std::vector<double> steps;
    for (std::size_t i = 1; i < r.records.size(); ++i)
      steps.push_back(component(r.records[i], k) - component(r.records[i - 1], k));
    int sign_changes = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (i > 0 && steps[i] * steps[i - 1] < 0.0) ++sign_changes;
      const std::size_t lo = i < 3 ? 0 : i - 3, hi = std::min(steps.size(), i + 4);
      std::vector<double> window;
      for (std::size_t j = lo; j < hi; ++j) window.push_back(std::abs(steps[j]));
      std::nth_element(window.begin(), window.begin() + window.size() / 2, window.end());
      EXPECT_LE(std::abs(steps[i]), 10.0 * window[window.size() / 2]) << "component " << k << " row " << i + 1;
    }
    EXPECT_LE(sign_changes, 1) << "component " << k;
  }
}

TEST(Sweep, RejectsBadGrid) {
  EXPECT_THROW(sweep(100e3, 230e3, 1, mission(), optimum()), ValidationError);
  EXPECT_THROW(sweep(230e3, 100e3, 5, mission(), optimum()), ValidationError);
}

TEST(Sweep, DeterministicAcrossRuns) {
  const SweepResult again = sweep(mission(), optimum());
  ASSERT_EQ(again.records.size(), default_sweep().records.size());
  for (std::size_t i = 0; i < again.records.size(); ++i) {
    EXPECT_EQ(again.records[i].final_mass, default_sweep().records[i].final_mass);
    EXPECT_EQ(again.records[i].initial_costate.p_m, default_sweep().records[i].initial_costate.p_m);
  }
}

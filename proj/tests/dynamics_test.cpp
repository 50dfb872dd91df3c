#include <cmath>

#include <gtest/gtest.h>
#include <insertion/insertion.hpp>

using namespace insertion;

namespace {

const MissionConfig kMission = MissionConfig::gto_example();
const Constants& kEarth = kMission.constants;
const double kVe = kMission.vehicle.exhaust_velocity;
const double kOptimalThrust = 131296.0;
const double kOptimalBurn = 839.19;
const double kOptimalFinalMass = 7898.4;

CartesianState ignition() { return kMission.initial_state(); }

Costate analytic_costate(double final_mass) {
  return initial_costates(kMission.initial_kinematics(), final_mass, kMission.vehicle.initial_mass, kVe, kEarth);
}

}  // namespace

TEST(StateRhs, ZeroThrustIsKepler) {
  const CartesianState s = ignition();
  const StateDerivative d = state_rhs(s, Vec2(1.0, 0.0), 0.0, kVe, kEarth);
  EXPECT_EQ(d.position, s.velocity);
  EXPECT_LT((d.velocity - gravity(s.position, kEarth)).norm(), 1e-15);
  EXPECT_EQ(d.mass, 0.0);
}

TEST(StateRhs, MassFlowIndependentOfState) {
  CartesianState s = ignition();
  const double expected = -kOptimalThrust / kVe;
  EXPECT_EQ(state_rhs(s, Vec2(0.0, 1.0), kOptimalThrust, kVe, kEarth).mass, expected);
  s.mass = 1234.0;
  s.position *= 3.0;
  EXPECT_EQ(state_rhs(s, Vec2(0.6, 0.8), kOptimalThrust, kVe, kEarth).mass, expected);
}

TEST(StateRhs, ThrustAccelerationAtIgnition) {
  const CartesianState s = ignition();
  const Vec2 u(0.6, 0.8);
  const StateDerivative d = state_rhs(s, u, kOptimalThrust, kVe, kEarth);
  EXPECT_NEAR((d.velocity - gravity(s.position, kEarth)).norm(), 3.2824, 1e-4);
}

TEST(StateRhs, Preconditions) {
  CartesianState s = ignition();
  EXPECT_THROW(state_rhs(s, Vec2(1.0, 1.0), 1.0, kVe, kEarth), DomainError);
  s.mass = 0.0;
  EXPECT_THROW(state_rhs(s, Vec2(1.0, 0.0), 1.0, kVe, kEarth), MassDepleted);
}

TEST(ExtremalRhs, ThrustFollowsVelocityCostate) {
  const CartesianState s = ignition();
  Costate p;
  p.p_v = Vec2(-3.0, 4.0);
  p.p_m = 0.2;
  const ExtremalDerivative d = extremal_rhs(s, p, kOptimalThrust, kVe, kEarth);
  const Vec2 thrust_acc = d.state.velocity - gravity(s.position, kEarth);
  EXPECT_NEAR(thrust_acc.normalized().dot(p.p_v.normalized()), 1.0, 1e-14);
  EXPECT_EQ(d.costate.p_v, -p.p_r);
}

TEST(ExtremalRhs, MassCostateProductRateIsThrustTimesSwitching) {
  const CartesianState s = ignition();
  const Costate p = analytic_costate(7000.0);
  const ExtremalDerivative d = extremal_rhs(s, p, kOptimalThrust, kVe, kEarth);
  const double rate = d.costate.p_m * s.mass + p.p_m * d.state.mass;
  const HamiltonianParts h = hamiltonian(s, p, kOptimalThrust, kVe, kEarth);
  EXPECT_NEAR(rate, kOptimalThrust * h.ht, 1e-12);
}

TEST(ExtremalRhs, MassCostateProductStationaryWhenSwitchingVanishes) {
  const CartesianState s = ignition();
  Costate p;
  p.p_v = Vec2(0.3, -0.4);
  p.p_m = p.p_v.norm() * kVe / s.mass;
  const ExtremalDerivative d = extremal_rhs(s, p, kOptimalThrust, kVe, kEarth);
  EXPECT_NEAR(d.costate.p_m * s.mass + p.p_m * d.state.mass, 0.0, 1e-12);
}

TEST(ExtremalRhs, ZeroVelocityCostateIsSingular) {
  EXPECT_THROW(extremal_rhs(ignition(), Costate{}, 1.0, kVe, kEarth), SingularCostate);
}

TEST(Hamiltonian, ZeroCostateGivesZero) {
  const HamiltonianParts h = hamiltonian(ignition(), Costate{}, kOptimalThrust, kVe, kEarth);
  EXPECT_EQ(h.total, 0.0);
  EXPECT_EQ(h.h0, 0.0);
  EXPECT_EQ(h.ht, 0.0);
}

TEST(Hamiltonian, SplitsIntoDriftAndThrustParts) {
  const Costate p = analytic_costate(kOptimalFinalMass);
  const HamiltonianParts h = hamiltonian(ignition(), p, kOptimalThrust, kVe, kEarth);
  EXPECT_DOUBLE_EQ(h.total, h.h0 + kOptimalThrust * h.ht);
}

TEST(Hamiltonian, AnalyticCostatesAtIgnition) {
  const Costate p = analytic_costate(kOptimalFinalMass);
  const HamiltonianParts h = hamiltonian(ignition(), p, kOptimalThrust, kVe, kEarth);
  // |p_v| = m_f/ve and p_m = m_f/m0 make the switching part vanish exactly.
  EXPECT_NEAR(h.ht, 0.0, 1e-15);
  // The drift part vanishes through the pitch relation at ignition.
  EXPECT_NEAR(h.h0, 0.0, 1e-9);
}

TEST(ClosedLoop, MassIsLinearInTime) {
  const double thrust = 100e3, t_f = 500.0;
  const Trajectory traj = propagate_closed_loop(ignition(), {thrust, kVe}, t_f, kEarth, kMission.integrator, 1.0);
  const double m0 = kMission.vehicle.initial_mass;
  for (const TrajectorySample& s : traj.samples)
    EXPECT_NEAR(s.state.mass, m0 - thrust * s.time / kVe, 1e-9 * m0) << "t = " << s.time;
}

TEST(ClosedLoop, SamplesEverySecondPlusFinalTime) {
  const Trajectory traj = propagate_closed_loop(ignition(), {100e3, kVe}, 10.5, kEarth, kMission.integrator, 1.0);
  ASSERT_EQ(traj.samples.size(), 12u);
  EXPECT_EQ(traj.samples[3].time, 3.0);
  EXPECT_EQ(traj.final().time, 10.5);
}

TEST(ClosedLoop, ZeroThrustConservesApsides) {
  CartesianState s = cartesian_from_polar(state_from_orbit({2000e3, 400e3, 0.3}, kEarth), 1000.0);
  const Apsides start = osculating_apsides(s, kEarth);
  const double a = kEarth.earth_radius + 0.5 * (2000e3 + 400e3);
  const double period = 2.0 * M_PI * std::sqrt(std::pow(a, 3) / kEarth.mu);
  const Trajectory traj = propagate_closed_loop(s, {0.0, kVe}, period, kEarth, kMission.integrator, 10.0);
  for (const TrajectorySample& x : traj.samples) {
    EXPECT_NEAR(x.apsides.apogee_altitude, start.apogee_altitude, 1.0);
    EXPECT_NEAR(x.apsides.perigee_altitude, start.perigee_altitude, 1.0);
    EXPECT_EQ(x.state.mass, 1000.0);
  }
}

TEST(ClosedLoop, HalvingToleranceConverges) {
  IntegratorSettings coarse = kMission.integrator;
  coarse.rel_tol = 1e-8;
  IntegratorSettings fine = coarse;
  fine.rel_tol = 0.5e-8;
  const BurnParameters burn{kOptimalThrust, kVe};
  const Vec2 a = propagate_closed_loop(ignition(), burn, kOptimalBurn, kEarth, coarse).final().state.position;
  const Vec2 b = propagate_closed_loop(ignition(), burn, kOptimalBurn, kEarth, fine).final().state.position;
  EXPECT_LT((a - b).norm(), 1e-8 * b.norm());
}

TEST(ClosedLoop, GuessPointApsides) {
  const Trajectory traj = propagate_closed_loop(ignition(), {126038.0, kVe}, 856.0, kEarth, kMission.integrator);
  EXPECT_NEAR(traj.final().apsides.apogee_altitude / 1e3, 24026.2, 50.0);
  EXPECT_NEAR(traj.final().apsides.perigee_altitude / 1e3, 188.4, 5.0);
}

TEST(ClosedLoop, OptimalPointReachesTarget) {
  const Trajectory traj =
      propagate_closed_loop(ignition(), {kOptimalThrust, kVe}, kOptimalBurn, kEarth, kMission.integrator);
  EXPECT_NEAR(traj.final().apsides.apogee_altitude / 1e3, 36000.0, 10.0);
  EXPECT_NEAR(traj.final().apsides.perigee_altitude / 1e3, 250.0, 0.5);
  EXPECT_NEAR(traj.final().state.mass, kOptimalFinalMass, 1.0);
}

TEST(ClosedLoop, MassDepletionIsReported) {
  try {
    propagate_closed_loop(ignition(), {kOptimalThrust, kVe}, 20000.0, kEarth, kMission.integrator);
    FAIL() << "expected PropagationError";
  } catch (const PropagationError& e) {
    EXPECT_EQ(e.kind(), FailureKind::mass_depleted);
    EXPECT_NEAR(e.time(), kMission.vehicle.initial_mass * kVe / kOptimalThrust, 1e-6);
  }
}

TEST(ClosedLoop, Rk4AgreesWithDopri) {
  IntegratorSettings rk4 = kMission.integrator;
  rk4.method = IntegratorMethod::rk4;
  const BurnParameters burn{kOptimalThrust, kVe};
  const Trajectory a = propagate_closed_loop(ignition(), burn, kOptimalBurn, kEarth, kMission.integrator, 1.0);
  const Trajectory b = propagate_closed_loop(ignition(), burn, kOptimalBurn, kEarth, rk4, 1.0);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  EXPECT_NEAR(a.final().apsides.apogee_altitude, b.final().apsides.apogee_altitude, 100.0);
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_NEAR(a.samples[i].pitch, b.samples[i].pitch, 1e-6);
}

TEST(Extremal, InitialSampleCarriesSeedInvariants) {
  const Costate p = analytic_costate(kOptimalFinalMass);
  const Trajectory traj =
      propagate_extremal(ignition(), p, {kOptimalThrust, kVe}, kOptimalBurn, kEarth, kMission.integrator, 1.0);
  const TrajectorySample& s0 = traj.initial();
  EXPECT_NEAR(s0.costate->p_v.norm(), kOptimalFinalMass / kVe, 1e-15);
  EXPECT_NEAR(s0.costate->p_m * s0.state.mass, kOptimalFinalMass, 1e-9);
  EXPECT_NEAR(s0.pitch, closed_loop_pitch(kMission.initial_kinematics(), kEarth).theta, 1e-12);
}

TEST(Extremal, HamiltonianIsConstant) {
  const Costate p = analytic_costate(kOptimalFinalMass);
  const Trajectory traj =
      propagate_extremal(ignition(), p, {kOptimalThrust, kVe}, kOptimalBurn, kEarth, kMission.integrator, 1.0);
  const double h0 = traj.initial().hamiltonian->total;
  const double scale = kVe / (kMission.vehicle.initial_mass * kEarth.g0);
  for (const TrajectorySample& s : traj.samples) EXPECT_NEAR((s.hamiltonian->total - h0) * scale, 0.0, 1e-8);
}

TEST(Extremal, VelocityCostateSecondDerivativeIsGravityGradient) {
  const Costate p = analytic_costate(kOptimalFinalMass);
  const double h = 1.0;
  const Trajectory traj =
      propagate_extremal(ignition(), p, {kOptimalThrust, kVe}, 800.0, kEarth, kMission.integrator, h);
  for (std::size_t i = 1; i + 1 < traj.samples.size(); i += 37) {
    const Vec2 second = (traj.samples[i + 1].costate->p_v - 2.0 * traj.samples[i].costate->p_v +
                         traj.samples[i - 1].costate->p_v) /
                        (h * h);
    const Vec2 expected = gravity_gradient(traj.samples[i].state.position, kEarth) * traj.samples[i].costate->p_v;
    EXPECT_LT((second - expected).norm(), 1e-4 * expected.norm()) << "t = " << traj.samples[i].time;
  }
}

TEST(Extremal, PitchGapGrowsSlowerThanPitchRotation) {
  // Both controls start from the same pitch and then drift apart slowly.
  const Costate p = analytic_costate(kOptimalFinalMass);
  const BurnParameters burn{kOptimalThrust, kVe};
  const Trajectory ext = propagate_extremal(ignition(), p, burn, 60.0, kEarth, kMission.integrator, 1.0);
  const Trajectory cl = propagate_closed_loop(ignition(), burn, 60.0, kEarth, kMission.integrator, 1.0);
  const double rate = std::abs(closed_loop_pitch(kMission.initial_kinematics(), kEarth).omega);
  EXPECT_NEAR(ext.samples[0].pitch, cl.samples[0].pitch, 1e-12);
  for (std::size_t i = 1; i < ext.samples.size(); ++i) {
    const double gap = std::abs(ext.samples[i].pitch - cl.samples[i].pitch);
    EXPECT_LT(gap, 0.02 * rate * ext.samples[i].time) << "t = " << ext.samples[i].time;
  }
}

TEST(SampleTimes, Grid) {
  EXPECT_EQ(sample_times(3.0, 0.0), (std::vector<double>{0.0, 3.0}));
  EXPECT_EQ(sample_times(3.0, 1.0), (std::vector<double>{0.0, 1.0, 2.0, 3.0}));
  EXPECT_EQ(sample_times(2.5, 1.0), (std::vector<double>{0.0, 1.0, 2.0, 2.5}));
}

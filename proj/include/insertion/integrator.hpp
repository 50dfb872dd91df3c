#pragma once

// Explicit Runge-Kutta integration for fixed-size Eigen states.
//
// Two schemes: adaptive Dormand-Prince 5(4) with Hairer's continuous
// extension (the default), and classical fixed-step RK4 with cubic Hermite
// sampling as a cross-check. Both return the state at caller-supplied sample
// times; the step sequence never depends on those times.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace insertion {

enum class IntegratorMethod { dopri54, rk4 };

struct IntegratorSettings {
  IntegratorMethod method = IntegratorMethod::dopri54;
  double rel_tol = 1e-10;
  double abs_tol_position = 1e-4;   // m
  double abs_tol_velocity = 1e-7;   // m/s
  double abs_tol_mass = 1e-7;       // kg
  double abs_tol_costate_position = 1e-15;  // kg/m
  double abs_tol_costate_velocity = 1e-11;  // kg/(m/s)
  double abs_tol_costate_mass = 1e-11;
  double fixed_step = 0.1;          // s, rk4 only
  double initial_step = 1.0;        // s
  double min_step = 1e-9;           // s
  long max_steps = 10'000'000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol_position > 0.0) || !(abs_tol_velocity > 0.0) || !(abs_tol_mass > 0.0))
      throw ValidationError("solver: integrator tolerances must be positive");
    if (!(fixed_step > 0.0)) throw ValidationError("solver.fixed_step must be positive");
    if (!(initial_step > 0.0) || !(min_step > 0.0)) throw ValidationError("solver: step sizes must be positive");
  }
};

template <int N>
using StateVector = Eigen::Matrix<double, N, 1>;

template <int N>
struct OdeSamples {
  std::vector<double> times;
  std::vector<StateVector<N>> states;
  long steps = 0;
  long rejected = 0;
};

namespace detail {

// Calls rhs, turning library errors into PropagationError tagged with t.
template <int N, class Rhs>
StateVector<N> eval_rhs(Rhs& rhs, double t, const StateVector<N>& y) {
  try {
    return rhs(t, y);
  } catch (const PropagationError&) {
    throw;
  } catch (const Error& e) {
    throw PropagationError(e.kind(), t, e.what());
  }
}

template <int N>
void check_samples(std::span<const double> sample_times, double t0, double t1) {
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < t0 || sample_times[i] > t1)
      throw DomainError("integrate: sample time outside the integration span");
    if (i > 0 && !(sample_times[i] > sample_times[i - 1]))
      throw DomainError("integrate: sample times must be strictly increasing");
  }
}

template <int N, class Rhs>
OdeSamples<N> integrate_dopri(Rhs& f, const StateVector<N>& y0, double t0, double t1,
                              std::span<const double> sample_times, const StateVector<N>& abs_tol,
                              const IntegratorSettings& settings) {
  // Dormand-Prince 5(4) tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  // Continuous extension coefficients.
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  OdeSamples<N> out;
  out.times.reserve(sample_times.size());
  out.states.reserve(sample_times.size());
  std::size_t next = 0;
  auto emit_exact = [&](double t, const StateVector<N>& y) {
    while (next < sample_times.size() && sample_times[next] == t) {
      out.times.push_back(t);
      out.states.push_back(y);
      ++next;
    }
  };

  double t = t0;
  StateVector<N> y = y0;
  emit_exact(t, y);
  if (t1 == t0) return out;

  StateVector<N> k1 = eval_rhs<N>(f, t, y);
  double h = std::min(settings.initial_step, t1 - t0);
  constexpr double safety = 0.9, min_factor = 0.2, max_factor = 5.0;
  bool last_rejected = false;

  while (t < t1) {
    if (out.steps + out.rejected >= settings.max_steps)
      throw PropagationError(FailureKind::step_underflow, t, "maximum number of steps exceeded");
    if (h < settings.min_step) throw PropagationError(FailureKind::step_underflow, t, "step size underflow");
    bool final_step = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      final_step = true;
    }

    const StateVector<N> k2 = eval_rhs<N>(f, t + c2 * h, StateVector<N>(y + h * a21 * k1));
    const StateVector<N> k3 = eval_rhs<N>(f, t + c3 * h, StateVector<N>(y + h * (a31 * k1 + a32 * k2)));
    const StateVector<N> k4 =
        eval_rhs<N>(f, t + c4 * h, StateVector<N>(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const StateVector<N> k5 =
        eval_rhs<N>(f, t + c5 * h, StateVector<N>(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const StateVector<N> k6 = eval_rhs<N>(
        f, t + h, StateVector<N>(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const StateVector<N> y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double t_new = final_step ? t1 : t + h;
    const StateVector<N> k7 = eval_rhs<N>(f, t_new, y_new);

    const StateVector<N> err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const StateVector<N> scale = abs_tol.array() + settings.rel_tol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array();
    const double err_norm = std::sqrt((err.array() / scale.array()).square().mean());
    if (!std::isfinite(err_norm)) {
      h *= min_factor;
      ++out.rejected;
      last_rejected = true;
      continue;
    }

    if (err_norm > 1.0) {
      h *= std::max(min_factor, safety * std::pow(err_norm, -0.2));
      ++out.rejected;
      last_rejected = true;
      continue;
    }

    // Accepted: sample inside (t, t_new] through the continuous extension.
    if (next < sample_times.size() && sample_times[next] <= t_new) {
      const StateVector<N> r1 = y;
      const StateVector<N> r2 = y_new - y;
      const StateVector<N> r3 = h * k1 - r2;
      const StateVector<N> r4 = r2 - h * k7 - r3;
      const StateVector<N> r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      while (next < sample_times.size() && sample_times[next] <= t_new) {
        const double ts = sample_times[next];
        if (ts == t_new) {
          out.states.push_back(y_new);
        } else {
          const double s = (ts - t) / h;
          const double s1 = 1.0 - s;
          out.states.push_back(r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5))));
        }
        out.times.push_back(ts);
        ++next;
      }
    }

    ++out.steps;
    t = t_new;
    y = y_new;
    k1 = k7;
    double factor = err_norm == 0.0 ? max_factor : safety * std::pow(err_norm, -0.2);
    factor = std::clamp(factor, min_factor, last_rejected ? 1.0 : max_factor);
    last_rejected = false;
    if (final_step) break;
    h *= factor;
  }
  return out;
}

template <int N, class Rhs>
OdeSamples<N> integrate_rk4(Rhs& f, const StateVector<N>& y0, double t0, double t1,
                            std::span<const double> sample_times, const IntegratorSettings& settings) {
  OdeSamples<N> out;
  out.times.reserve(sample_times.size());
  out.states.reserve(sample_times.size());
  std::size_t next = 0;

  double t = t0;
  StateVector<N> y = y0;
  while (next < sample_times.size() && sample_times[next] == t) {
    out.times.push_back(t);
    out.states.push_back(y);
    ++next;
  }
  if (t1 == t0) return out;

  const long n_steps = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / settings.fixed_step - 1e-9)));
  StateVector<N> k1 = eval_rhs<N>(f, t, y);
  for (long i = 0; i < n_steps; ++i) {
    const double t_new = i + 1 == n_steps ? t1 : t0 + (i + 1) * settings.fixed_step;
    const double h = t_new - t;
    const StateVector<N> k2 = eval_rhs<N>(f, t + 0.5 * h, StateVector<N>(y + 0.5 * h * k1));
    const StateVector<N> k3 = eval_rhs<N>(f, t + 0.5 * h, StateVector<N>(y + 0.5 * h * k2));
    const StateVector<N> k4 = eval_rhs<N>(f, t + h, StateVector<N>(y + h * k3));
    const StateVector<N> y_new = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const StateVector<N> k_new = eval_rhs<N>(f, t_new, y_new);
    while (next < sample_times.size() && sample_times[next] <= t_new) {
      const double ts = sample_times[next];
      if (ts == t_new) {
        out.states.push_back(y_new);
      } else {
        // Cubic Hermite between the step endpoints.
        const double s = (ts - t) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        out.states.push_back(h00 * y + h10 * h * k1 + h01 * y_new + h11 * h * k_new);
      }
      out.times.push_back(ts);
      ++next;
    }
    t = t_new;
    y = y_new;
    k1 = k_new;
    ++out.steps;
  }
  return out;
}

}  // namespace detail

/// Integrates dy/dt = rhs(t, y) from t0 to t1 and returns y at `sample_times`
/// (strictly increasing, inside [t0, t1]). `abs_tol` is per component.
template <int N, class Rhs>
OdeSamples<N> integrate(Rhs&& rhs, const StateVector<N>& y0, double t0, double t1,
                        std::span<const double> sample_times, const StateVector<N>& abs_tol,
                        const IntegratorSettings& settings) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || t1 < t0)
    throw DomainError("integrate: time span must be finite and forward");
  detail::check_samples<N>(sample_times, t0, t1);
  if (settings.method == IntegratorMethod::rk4)
    return detail::integrate_rk4<N>(rhs, y0, t0, t1, sample_times, settings);
  return detail::integrate_dopri<N>(rhs, y0, t0, t1, sample_times, abs_tol, settings);
}

}  // namespace insertion

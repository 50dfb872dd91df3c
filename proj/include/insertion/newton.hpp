#pragma once

// Damped Newton iteration with a forward-difference Jacobian, shared by the
// two-unknown thrust optimizer and the six-unknown shooting solver.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "errors.hpp"

namespace insertion {

struct NewtonOptions {
  int max_iterations = 30;
  int max_halvings = 8;
  double fd_relative_step = 1e-3;
  double fd_min_step = 0.0;
};

template <int N>
struct NewtonResult {
  Eigen::Matrix<double, N, 1> x;
  Eigen::Matrix<double, N, 1> residual;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

/// Solves f(x) = 0. `converged(r)` decides termination and `project(x)`
/// maps a trial point back into the admissible set. A trial point whose
/// evaluation throws insertion::Error counts as a failed step and is halved;
/// a failure at x0 propagates to the caller.
template <int N, class F, class Converged, class Project>
NewtonResult<N> damped_newton(F&& f, const Eigen::Matrix<double, N, 1>& x0, const NewtonOptions& options,
                              Converged&& converged, Project&& project) {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;

  NewtonResult<N> result;
  result.x = x0;
  result.residual = f(x0);
  ++result.evaluations;

  auto try_eval = [&](const Vec& x) -> std::optional<Vec> {
    ++result.evaluations;
    try {
      Vec r = f(x);
      if (!r.allFinite()) return std::nullopt;
      return r;
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  for (;;) {
    if (converged(result.residual)) {
      result.converged = true;
      return result;
    }
    if (result.iterations >= options.max_iterations) {
      result.message = "maximum iterations reached";
      return result;
    }
    ++result.iterations;

    Mat jac;
    for (int j = 0; j < N; ++j) {
      const double step = std::max(options.fd_relative_step * std::abs(result.x[j]), options.fd_min_step);
      const double h = step > 0.0 ? step : options.fd_relative_step;
      Vec xp = result.x;
      xp[j] += h;
      if (auto r = try_eval(xp)) {
        jac.col(j) = (*r - result.residual) / h;
        continue;
      }
      Vec xm = result.x;
      xm[j] -= h;
      if (auto r = try_eval(xm)) {
        jac.col(j) = (result.residual - *r) / h;
        continue;
      }
      result.message = "Jacobian column " + std::to_string(j) + " could not be evaluated";
      return result;
    }

    const Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) {
      result.message = "singular Jacobian";
      return result;
    }
    const Vec delta = -lu.solve(result.residual);
    const double norm0 = result.residual.norm();

    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k <= options.max_halvings; ++k, lambda *= 0.5) {
      const Vec trial = project(Vec(result.x + lambda * delta));
      if (auto r = try_eval(trial); r && r->norm() < norm0) {
        result.x = trial;
        result.residual = *r;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.message = "line search failed to reduce the residual";
      return result;
    }
  }
}

}  // namespace insertion

#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace lightpos::detail {

struct LmOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  double initial_damping = 1e-3;
  // Damping above this means no descent direction was found.
  double max_damping = 1e16;
};

struct LmResult {
  Eigen::VectorXd params;
  Eigen::VectorXd residuals;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton with multiplicative Marquardt scaling.
///
/// `model(p, r, J)` fills residuals and Jacobian at p and returns false when p
/// is outside the model's domain (the step is then rejected). The damping
/// starts at `initial_damping`, is multiplied by 10 on a rejected step and by
/// 0.1 on an accepted one. Convergence is declared when a step (accepted or
/// not) is shorter than step_tolerance * (1 + |p|).
template <class Model>
LmResult levenberg_marquardt(Model&& model, Eigen::VectorXd p, const LmOptions& opt) {
  const Eigen::Index n = p.size();
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  LmResult out;
  if (!model(p, r, jac)) {
    out.params = p;
    out.cost = std::numeric_limits<double>::infinity();
    return out;
  }
  double cost = r.squaredNorm();
  double lambda = opt.initial_damping;

  Eigen::VectorXd r_new;
  Eigen::MatrixXd jac_new;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    Eigen::MatrixXd damped = jtj;
    for (Eigen::Index i = 0; i < n; ++i) {
      damped(i, i) += lambda * std::max(jtj(i, i), 1e-12);
    }
    const Eigen::VectorXd step = damped.ldlt().solve(-grad);
    const double step_limit = opt.step_tolerance * (1.0 + p.norm());
    if (!step.allFinite()) {
      lambda *= 10.0;
      if (lambda > opt.max_damping) break;
      continue;
    }
    const Eigen::VectorXd candidate = p + step;
    const bool ok = model(candidate, r_new, jac_new);
    const double cost_new = ok ? r_new.squaredNorm() : std::numeric_limits<double>::infinity();
    if (cost_new < cost) {
      p = candidate;
      r.swap(r_new);
      jac.swap(jac_new);
      cost = cost_new;
      lambda = std::max(lambda * 0.1, 1e-15);
      if (step.norm() < step_limit) {
        out.converged = true;
        ++it;
        break;
      }
    } else {
      if (step.norm() < step_limit) {
        out.converged = true;
        ++it;
        break;
      }
      lambda *= 10.0;
      if (lambda > opt.max_damping) break;
    }
  }
  out.params = p;
  out.residuals = r;
  out.cost = cost;
  out.iterations = it;
  return out;
}

}  // namespace lightpos::detail

// Copyright 2026 The soccer3d Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace soccer3d::detail {

// Residual callback: fills r for parameters x. Returns false when the
// parameters are not evaluable (e.g. a singular camera); such trial steps
// are rejected.
using ResidualFn = std::function<bool(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;

struct LmOptions {
  int max_iterations = 100;
  double relative_tolerance = 1e-8;
  double initial_damping = 1e-3;
  // Central-difference step per parameter.
  Eigen::VectorXd steps;
  // Called before each linearization with the current parameters.
  std::function<void(const Eigen::VectorXd&)> begin_iteration;
  // Optional analytic Jacobian; replaces the central differences.
  std::function<bool(const Eigen::VectorXd&, Eigen::MatrixXd&)> jacobian;
};

struct LmResult {
  Eigen::VectorXd params;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  std::vector<double> accepted_costs;
  bool finite = true;
};

// Damped least squares (Levenberg-Marquardt) with a central-difference
// Jacobian. Only steps that strictly lower the cost are accepted.
inline LmResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd x, const LmOptions& opt) {
  const auto n = x.size();
  LmResult result;
  if (opt.begin_iteration) opt.begin_iteration(x);
  Eigen::VectorXd r;
  if (!residuals(x, r) || !r.allFinite()) {
    result.params = x;
    result.finite = false;
    result.initial_cost = result.final_cost = std::numeric_limits<double>::infinity();
    return result;
  }
  double cost = r.squaredNorm();
  result.initial_cost = cost;
  result.accepted_costs.push_back(cost);
  double mu = opt.initial_damping;
  Eigen::MatrixXd jac(r.size(), n);
  Eigen::VectorXd rp, rm, trial_r;

  for (int it = 0; it < opt.max_iterations; ++it) {
    result.iterations = it + 1;
    if (it > 0 && opt.begin_iteration) {
      opt.begin_iteration(x);
      if (!residuals(x, r)) break;
      cost = r.squaredNorm();
    }
    if (cost == 0.0) break;
    jac.resize(r.size(), n);
    bool jac_ok = true;
    if (opt.jacobian) jac_ok = opt.jacobian(x, jac) && jac.rows() == r.size() && jac.cols() == n;
    for (Eigen::Index k = 0; k < n && !opt.jacobian; ++k) {
      const double h = opt.steps.size() == n ? opt.steps(k) : 1e-6 * std::max(1.0, std::abs(x(k)));
      Eigen::VectorXd xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      if (!residuals(xp, rp) || !residuals(xm, rm) || rp.size() != r.size() || rm.size() != r.size()) {
        jac_ok = false;
        break;
      }
      jac.col(k) = (rp - rm) / (2.0 * h);
    }
    if (!jac_ok || !jac.allFinite()) break;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() == 0.0) break;

    bool accepted = false;
    double new_cost = cost;
    while (mu < 1e16) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index k = 0; k < n; ++k) a(k, k) += mu * std::max(jtj(k, k), 1e-12);
      const Eigen::VectorXd delta = a.ldlt().solve(-g);
      if (!delta.allFinite()) {
        mu *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = x + delta;
      if (residuals(trial, trial_r) && trial_r.size() > 0 && trial_r.allFinite()) {
        new_cost = trial_r.squaredNorm();
        if (new_cost < cost) {
          x = trial;
          r = trial_r;
          accepted = true;
          mu = std::max(mu * 0.3, 1e-12);
          break;
        }
      }
      mu *= 10.0;
    }
    if (!accepted) break;
    const double rel = (cost - new_cost) / std::max(cost, std::numeric_limits<double>::min());
    cost = new_cost;
    result.accepted_costs.push_back(cost);
    if (rel < opt.relative_tolerance) break;
  }
  result.params = x;
  result.final_cost = cost;
  return result;
}

}  // namespace soccer3d::detail

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


#include "soccer3d/trajectory.hpp"

#include <cmath>
#include <string>

namespace soccer3d {

namespace detail {

std::vector<double> solve_banded_spd(std::vector<std::vector<double>> bands, std::vector<double> rhs) {
  const int n = static_cast<int>(rhs.size());
  const int p = static_cast<int>(bands.size()) - 1;
  const auto at = [&](int i, int k) -> double& { return bands[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]; };
  // In-place LDL^T restricted to the band.
  std::vector<double> d(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double dj = at(j, 0);
    for (int k = std::max(0, j - p); k < j; ++k) {
      const double l = at(k, j - k);
      dj -= l * l * d[static_cast<std::size_t>(k)];
    }
    if (!(dj > 0.0)) fail(ErrorCode::kUnconstrained, "trajectory system is not positive definite");
    d[static_cast<std::size_t>(j)] = dj;
    for (int i = j + 1; i <= std::min(n - 1, j + p); ++i) {
      double v = at(j, i - j);
      for (int k = std::max(0, i - p); k < j; ++k) {
        v -= at(k, i - k) * at(k, j - k) * d[static_cast<std::size_t>(k)];
      }
      at(j, i - j) = v / dj;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = std::max(0, i - p); k < i; ++k) rhs[static_cast<std::size_t>(i)] -= at(k, i - k) * rhs[static_cast<std::size_t>(k)];
  }
  for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] /= d[static_cast<std::size_t>(i)];
  for (int i = n - 1; i >= 0; --i) {
    for (int k = i + 1; k <= std::min(n - 1, i + p); ++k) rhs[static_cast<std::size_t>(i)] -= at(i, k - i) * rhs[static_cast<std::size_t>(k)];
  }
  return rhs;
}

}  // namespace detail

std::vector<Vec3> smooth_trajectory(const TrajectoryProblem& problem) {
  const int n = problem.n_frames;
  if (n < 1) fail(ErrorCode::kInvalidArgument, "n_frames must be at least 1");
  if (problem.observations.empty()) fail(ErrorCode::kUnconstrained, "trajectory has no observations");
  if (!(problem.smoothness >= 0.0) || !std::isfinite(problem.smoothness)) {
    fail(ErrorCode::kInvalidArgument, "smoothness weight must be finite and non-negative");
  }
  for (const auto& [t, d] : problem.observations) {
    if (t < 0 || t >= n) fail(ErrorCode::kInvalidArgument, "observation frame " + std::to_string(t) + " out of range");
    if (!d.allFinite()) fail(ErrorCode::kInvalidArgument, "observation is not finite");
  }

  const bool full = static_cast<int>(problem.observations.size()) == n;
  const bool weak = problem.smoothness == 0.0 || n < 3;
  if (problem.observations.size() == 1 || (weak && !full)) {
    if (problem.observations.size() > 1) {
      fail(ErrorCode::kUnconstrained, "unobserved frames are unconstrained without a smoothness term");
    }
    return std::vector<Vec3>(static_cast<std::size_t>(n), problem.observations.begin()->second);
  }
  if (weak) {
    std::vector<Vec3> out;
    for (const auto& entry : problem.observations) out.push_back(entry.second);
    return out;
  }

  const std::size_t un = static_cast<std::size_t>(n);
  std::vector<std::vector<double>> bands(3, std::vector<double>(un, 0.0));
  const double w = problem.smoothness;
  // Each second-difference row (1, -2, 1) at t-1, t, t+1 adds its outer product.
  const double stencil[3] = {1.0, -2.0, 1.0};
  for (int t = 1; t + 1 < n; ++t) {
    for (int a = 0; a < 3; ++a) {
      for (int b = a; b < 3; ++b) {
        bands[static_cast<std::size_t>(b - a)][static_cast<std::size_t>(t - 1 + a)] += w * stencil[a] * stencil[b];
      }
    }
  }
  for (const auto& entry : problem.observations) bands[0][static_cast<std::size_t>(entry.first)] += 1.0;

  std::vector<Vec3> out(un, Vec3::Zero());
  for (int c = 0; c < 3; ++c) {
    std::vector<double> rhs(un, 0.0);
    for (const auto& [t, d] : problem.observations) rhs[static_cast<std::size_t>(t)] = d(c);
    const std::vector<double> x = detail::solve_banded_spd(bands, rhs);
    for (std::size_t t = 0; t < un; ++t) out[t](c) = x[t];
  }
  return out;
}

void to_json(nlohmann::json& j, const TrajectoryProblem& problem) {
  nlohmann::json obs = nlohmann::json::object();
  for (const auto& [t, d] : problem.observations) obs[std::to_string(t)] = {d.x(), d.y(), d.z()};
  j = {{"n_frames", problem.n_frames}, {"observations", obs}, {"smoothness", problem.smoothness}};
}

void from_json(const nlohmann::json& j, TrajectoryProblem& problem) {
  try {
    problem.n_frames = j.at("n_frames").get<int>();
    problem.smoothness = j.value("smoothness", 1.0);
    problem.observations.clear();
    for (const auto& [key, value] : j.at("observations").items()) {
      std::size_t used = 0;
      const int t = std::stoi(key, &used);
      if (used != key.size()) fail(ErrorCode::kFormat, "observation key '" + key + "' is not a frame index");
      if (value.size() != 3) fail(ErrorCode::kFormat, "observation must be [x, y, z]");
      problem.observations[t] = Vec3(value[0].get<double>(), value[1].get<double>(), value[2].get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("trajectory problem: ") + e.what());
  } catch (const std::logic_error&) {
    fail(ErrorCode::kFormat, "observation keys must be frame indices");
  }
}

nlohmann::json trajectory_to_json(const std::vector<Vec3>& trajectory) {
  nlohmann::json rows = nlohmann::json::array();
  for (const Vec3& x : trajectory) rows.push_back({x.x(), x.y(), x.z()});
  return {{"trajectory", rows}};
}

std::vector<Vec3> trajectory_from_json(const nlohmann::json& j) {
  std::vector<Vec3> out;
  try {
    for (const auto& row : j.at("trajectory")) out.emplace_back(row.at(0).get<double>(), row.at(1).get<double>(), row.at(2).get<double>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("trajectory: ") + e.what());
  }
  return out;
}

}  // namespace soccer3d

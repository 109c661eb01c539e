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

#include <map>
#include <vector>

#include "soccer3d/geometry.hpp"

namespace soccer3d {

struct TrajectoryProblem {
  int n_frames = 0;
  std::map<int, Vec3> observations;  // frame -> lifted box center
  double smoothness = 1.0;
};

// Exact minimizer of sum_{t in M} |X_t - D_t|^2 + w * sum |X_{t-1} - 2 X_t + X_{t+1}|^2,
// one pentadiagonal solve per coordinate. When the minimizer is not unique
// (a single observation, or N < 3 with gaps) the constant fill is returned.
std::vector<Vec3> smooth_trajectory(const TrajectoryProblem& problem);

void to_json(nlohmann::json& j, const TrajectoryProblem& problem);
void from_json(const nlohmann::json& j, TrajectoryProblem& problem);
nlohmann::json trajectory_to_json(const std::vector<Vec3>& trajectory);
std::vector<Vec3> trajectory_from_json(const nlohmann::json& j);

namespace detail {
// Symmetric positive-definite banded solve; `bands[k][i]` holds A(i, i + k).
std::vector<double> solve_banded_spd(std::vector<std::vector<double>> bands, std::vector<double> rhs);
}  // namespace detail

}  // namespace soccer3d

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

#include <span>
#include <vector>

#include "soccer3d/geometry.hpp"

namespace soccer3d {

struct PixelIndex {
  int x = 0;
  int y = 0;
  bool operator==(const PixelIndex&) const = default;
};

// Label image convention: 0 other, 1 ground, 2 player.
inline constexpr std::uint8_t kGameLabelOther = 0;
inline constexpr std::uint8_t kGameLabelGround = 1;
inline constexpr std::uint8_t kGameLabelPlayer = 2;

struct NdcCapture {
  Grid<double> depth;  // buffer depth in [0, 1]
  std::vector<PixelIndex> ground_pixels;
  std::vector<PixelIndex> player_pixels;

  ImageSize image_size() const { return depth.size(); }
  static NdcCapture from_labels(Grid<double> depth, const Grid<std::uint8_t>& labels);
  void validate() const;
};

struct GameCamParams {
  Vec3 rotation = Vec3::Zero();
  Vec3 translation = Vec3::Zero();
  double focal = 1.0;
  double z_near = 1.0;
  double z_far = 1000.0;

  // Pose and focal of the auxiliary camera, near 1 m, far 1000 m.
  static GameCamParams from_aux(const Camera& aux);
  GlCamera gl_camera(ImageSize size) const;
  void validate() const;
};

struct GroundTargets {
  std::vector<Vec3> points;
  std::vector<PixelIndex> pixels;  // source pixel of each point
  std::size_t dropped = 0;
};

// Ray from each pixel center of the auxiliary camera to y = 0.
GroundTargets ground_targets(const Camera& aux, std::span<const PixelIndex> ground_pixels);

struct GameCamOptions {
  double lambda = 0.01;
  std::size_t max_ground = 5000;
  std::size_t max_player = 5000;
  std::size_t min_ground = 100;
  std::size_t min_player = 20;
  int max_iterations = 200;
  double relative_tolerance = 1e-12;
  NdcConvention convention;
};

struct GameCamResult {
  GlCamera glcam;
  GameCamParams params;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double ground_term = 0.0;  // sum |X_p - X^_p|^2
  double player_term = 0.0;  // sum |y_q - y^_q|^2, before the lambda weight
  int iterations = 0;
  std::size_t dropped_targets = 0;
  std::vector<double> accepted_costs;
};

// Damped least squares over rotation, translation, log focal, log near and
// log(far - near). Ground pixels pull their unprojection onto the aux ray hit
// on y = 0; player pixels pull the aux reprojection of their unprojection
// back onto themselves, weighted by lambda.
GameCamResult recover_game_camera(const NdcCapture& capture, const Camera& aux, const GameCamParams& init,
                                  const GameCamOptions& options = {});

// Objective at fixed parameters, on the same subsampled pixel sets.
double game_camera_objective(const NdcCapture& capture, const Camera& aux, const GameCamParams& params,
                             const GameCamOptions& options = {});

}  // namespace soccer3d

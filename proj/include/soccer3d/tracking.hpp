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

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soccer3d/depthmesh.hpp"
#include "soccer3d/geometry.hpp"

namespace soccer3d {

struct Keypoint {
  Vec2 position = Vec2::Zero();
  double confidence = 1.0;
};

using Keypoints = std::map<std::string, Keypoint>;

struct Pose {
  int frame = 0;
  Keypoints keypoints;
};

struct Detection {
  int frame = 0;
  PixelBox bbox;
  Keypoints keypoints;
  std::optional<int> player_id;
};

struct Track {
  int id = 0;
  std::vector<Detection> detections;
};

struct RefineBoxOptions {
  double padding = 0.1;  // fraction of the keypoint extent, per side
  double min_height = 1.0;
  double max_height = 2.5;
};

// Matches each pose of one frame to the box holding most of its keypoints and
// replaces the box by the padded keypoint extent. Boxes no pose claims are
// dropped. With a camera, detections whose keypoint extent lifts to a height
// outside [min_height, max_height] are dropped as well.
std::vector<Detection> refine_boxes(std::span<const Detection> boxes, std::span<const Pose> poses, ImageSize image_size,
                                    const Camera* camera = nullptr, const RefineBoxOptions& options = {},
                                    std::size_t* dropped = nullptr);

struct MergeOptions {
  double distance_threshold = 50.0;  // pixels, strict
  int frame_window = 10;             // frames, inclusive
};

// Greedy neck-keypoint linking. Every detection starts as its own track; the
// globally closest admissible (end of A, start of B) pair is merged until no
// pair is under the threshold. Ties go to the earlier end frame, then the
// lower canonical detection index.
std::vector<Track> merge_tracks(std::span<const Detection> detections, const MergeOptions& options = {});

// Bone list over the keypoint names used throughout (neck, head, shoulders,
// elbows, wrists, hips, knees, ankles with left_/right_ prefixes).
const std::vector<std::array<std::string, 2>>& skeleton_bones();
// Bones of one detection whose endpoints are both present and confident.
std::vector<std::array<Vec2, 2>> detection_bones(const Keypoints& keypoints, double min_confidence = 0.1);

// Contact pixel for billboard lifting: the ankle midpoint when both ankles are
// confident, else the box bottom center.
Vec2 ground_contact(const Detection& detection);

void to_json(nlohmann::json& j, const Detection& d);
void from_json(const nlohmann::json& j, Detection& d);
void to_json(nlohmann::json& j, const Track& t);
void from_json(const nlohmann::json& j, Track& t);
void to_json(nlohmann::json& j, const Pose& p);
void from_json(const nlohmann::json& j, Pose& p);

}  // namespace soccer3d

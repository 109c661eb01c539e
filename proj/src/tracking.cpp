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


#include "soccer3d/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace soccer3d {
namespace {

const Keypoint& neck_of(const Detection& d) {
  const auto it = d.keypoints.find("neck");
  if (it == d.keypoints.end()) fail(ErrorCode::kMalformedDetection, "detection in frame " + std::to_string(d.frame) + " has no neck keypoint");
  return it->second;
}

void validate(const Detection& d) {
  if (!(d.bbox.width > 0.0) || !(d.bbox.height > 0.0)) {
    fail(ErrorCode::kMalformedDetection, "detection in frame " + std::to_string(d.frame) + " has an empty box");
  }
  for (const auto& [name, k] : d.keypoints) {
    if (!(k.confidence >= 0.0 && k.confidence <= 1.0)) {
      fail(ErrorCode::kMalformedDetection, "keypoint '" + name + "' in frame " + std::to_string(d.frame) + " has confidence outside [0, 1]");
    }
  }
}

auto sort_key(const Detection& d) {
  const Vec2 n = neck_of(d).position;
  return std::make_tuple(d.frame, n.x(), n.y(), d.bbox.x, d.bbox.y, d.bbox.width, d.bbox.height);
}

}  // namespace

const std::vector<std::array<std::string, 2>>& skeleton_bones() {
  static const std::vector<std::array<std::string, 2>> bones = {
      {"head", "neck"},
      {"neck", "right_shoulder"},
      {"neck", "left_shoulder"},
      {"right_shoulder", "right_elbow"},
      {"right_elbow", "right_wrist"},
      {"left_shoulder", "left_elbow"},
      {"left_elbow", "left_wrist"},
      {"neck", "right_hip"},
      {"neck", "left_hip"},
      {"right_hip", "right_knee"},
      {"right_knee", "right_ankle"},
      {"left_hip", "left_knee"},
      {"left_knee", "left_ankle"},
  };
  return bones;
}

std::vector<std::array<Vec2, 2>> detection_bones(const Keypoints& keypoints, double min_confidence) {
  std::vector<std::array<Vec2, 2>> out;
  for (const auto& [a, b] : skeleton_bones()) {
    const auto ia = keypoints.find(a);
    const auto ib = keypoints.find(b);
    if (ia == keypoints.end() || ib == keypoints.end()) continue;
    if (ia->second.confidence < min_confidence || ib->second.confidence < min_confidence) continue;
    out.push_back({ia->second.position, ib->second.position});
  }
  return out;
}

Vec2 ground_contact(const Detection& detection) {
  const auto l = detection.keypoints.find("left_ankle");
  const auto r = detection.keypoints.find("right_ankle");
  if (l != detection.keypoints.end() && r != detection.keypoints.end() && l->second.confidence >= 0.5 &&
      r->second.confidence >= 0.5) {
    return 0.5 * (l->second.position + r->second.position);
  }
  return detection.bbox.bottom_center();
}

std::vector<Detection> refine_boxes(std::span<const Detection> boxes, std::span<const Pose> poses, ImageSize image_size,
                                    const Camera* camera, const RefineBoxOptions& options, std::size_t* dropped) {
  std::size_t lost = 0;
  std::vector<bool> claimed(boxes.size(), false);
  std::vector<Detection> out;
  for (const Pose& pose : poses) {
    double x0 = std::numeric_limits<double>::max(), y0 = x0;
    double x1 = std::numeric_limits<double>::lowest(), y1 = x1;
    int used = 0;
    for (const auto& [name, k] : pose.keypoints) {
      if (!(k.confidence > 0.0)) continue;
      x0 = std::min(x0, k.position.x());
      y0 = std::min(y0, k.position.y());
      x1 = std::max(x1, k.position.x());
      y1 = std::max(y1, k.position.y());
      ++used;
    }
    if (used == 0) {
      ++lost;
      continue;
    }

    int best = -1;
    int best_count = 0;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if (boxes[b].frame != pose.frame) continue;
      const PixelBox& box = boxes[b].bbox;
      int count = 0;
      for (const auto& entry : pose.keypoints) {
        const Vec2& p = entry.second.position;
        count += entry.second.confidence > 0.0 && p.x() >= box.x && p.x() <= box.x + box.width && p.y() >= box.y &&
                 p.y() <= box.y + box.height;
      }
      if (count > best_count) {
        best = static_cast<int>(b);
        best_count = count;
      }
    }
    if (best >= 0) claimed[static_cast<std::size_t>(best)] = true;

    const double pad_x = options.padding * (x1 - x0);
    const double pad_y = options.padding * (y1 - y0);
    const double bx0 = std::clamp(x0 - pad_x, 0.0, static_cast<double>(image_size.width));
    const double by0 = std::clamp(y0 - pad_y, 0.0, static_cast<double>(image_size.height));
    const double bx1 = std::clamp(x1 + pad_x, 0.0, static_cast<double>(image_size.width));
    const double by1 = std::clamp(y1 + pad_y, 0.0, static_cast<double>(image_size.height));
    Detection d;
    d.frame = pose.frame;
    d.bbox = PixelBox{bx0, by0, bx1 - bx0, by1 - by0};
    d.keypoints = pose.keypoints;
    if (!(d.bbox.width > 0.0) || !(d.bbox.height > 0.0)) {
      ++lost;
      continue;
    }
    if (camera) {
      bool plausible = false;
      try {
        // Height of the keypoint extent itself; padding would inflate it.
        const PixelBox tight{x0, y0, x1 - x0, y1 - y0};
        const Billboard b = lift_billboard_at(*camera, tight.bottom_center());
        const double h = billboard_height_at(*camera, b, tight.top_center());
        plausible = h >= options.min_height && h <= options.max_height;
      } catch (const Error&) {
        plausible = false;
      }
      if (!plausible) {
        ++lost;
        continue;
      }
    }
    out.push_back(std::move(d));
  }
  lost += static_cast<std::size_t>(std::count(claimed.begin(), claimed.end(), false));
  if (dropped) *dropped = lost;
  return out;
}

std::vector<Track> merge_tracks(std::span<const Detection> detections, const MergeOptions& options) {
  for (const Detection& d : detections) {
    validate(d);
    neck_of(d);
  }
  std::vector<Detection> dets(detections.begin(), detections.end());
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return sort_key(a) < sort_key(b); });
  const std::size_t n = dets.size();

  // Linking the tail of A to the head of B leaves every other candidate
  // distance unchanged, so one pass over the sorted pairs is the greedy.
  struct Pair {
    double distance;
    int end_frame;
    std::size_t a;
    std::size_t b;
  };
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const int gap = dets[b].frame - dets[a].frame;
      if (gap <= 0 || gap > options.frame_window) continue;
      const double dist = (neck_of(dets[a]).position - neck_of(dets[b]).position).norm();
      if (dist < options.distance_threshold) pairs.push_back({dist, dets[a].frame, a, b});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return std::tie(x.distance, x.end_frame, x.a, x.b) < std::tie(y.distance, y.end_frame, y.a, y.b);
  });
  std::vector<std::size_t> next(n, n);
  std::vector<bool> has_prev(n, false);
  for (const Pair& p : pairs) {
    if (next[p.a] != n || has_prev[p.b]) continue;
    next[p.a] = p.b;
    has_prev[p.b] = true;
  }

  std::vector<Track> tracks;
  for (std::size_t head = 0; head < n; ++head) {
    if (has_prev[head]) continue;
    Track t;
    t.id = static_cast<int>(tracks.size());
    for (std::size_t i = head; i != n; i = next[i]) {
      Detection d = dets[i];
      d.player_id = t.id;
      t.detections.push_back(std::move(d));
    }
    tracks.push_back(std::move(t));
  }
  return tracks;
}

namespace {

nlohmann::json keypoints_json(const Keypoints& k) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, kp] : k) j[name] = {kp.position.x(), kp.position.y(), kp.confidence};
  return j;
}

Keypoints keypoints_from(const nlohmann::json& j) {
  Keypoints k;
  for (const auto& [name, v] : j.items()) {
    if (v.size() != 3) fail(ErrorCode::kFormat, "keypoint '" + name + "' must be [u, v, confidence]");
    k[name] = Keypoint{Vec2(v[0].get<double>(), v[1].get<double>()), v[2].get<double>()};
  }
  return k;
}

}  // namespace

void to_json(nlohmann::json& j, const Detection& d) {
  j = {{"frame", d.frame}, {"bbox", {d.bbox.x, d.bbox.y, d.bbox.width, d.bbox.height}}, {"keypoints", keypoints_json(d.keypoints)}};
  if (d.player_id) j["player_id"] = *d.player_id;
}

void from_json(const nlohmann::json& j, Detection& d) {
  try {
    d.frame = j.at("frame").get<int>();
    const auto& b = j.at("bbox");
    if (b.size() != 4) fail(ErrorCode::kFormat, "bbox must be [x, y, w, h]");
    d.bbox = PixelBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    d.keypoints = j.contains("keypoints") ? keypoints_from(j.at("keypoints")) : Keypoints{};
    d.player_id.reset();
    if (j.contains("player_id") && !j.at("player_id").is_null()) d.player_id = j.at("player_id").get<int>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("detection: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const Track& t) {
  j = {{"id", t.id}, {"detections", t.detections}};
}

void from_json(const nlohmann::json& j, Track& t) {
  try {
    t.id = j.at("id").get<int>();
    t.detections = j.at("detections").get<std::vector<Detection>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("track: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const Pose& p) { j = {{"frame", p.frame}, {"keypoints", keypoints_json(p.keypoints)}}; }

void from_json(const nlohmann::json& j, Pose& p) {
  try {
    p.frame = j.at("frame").get<int>();
    p.keypoints = keypoints_from(j.at("keypoints"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("pose: ") + e.what());
  }
}

}  // namespace soccer3d

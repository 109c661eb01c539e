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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soccer3d/geometry.hpp"

namespace soccer3d {

struct LineSegment {
  Vec3 a;
  Vec3 b;
};

// Arc in the y = 0 plane: center + radius * (cos a, 0, sin a) for a in [start, end].
struct ArcSegment {
  Vec3 center;
  double radius = 0.0;
  double start_angle = 0.0;
  double end_angle = 0.0;
};

// Marking dimensions in meters. Defaults are the standard FIFA values.
struct FieldDimensions {
  double length = 105.0;
  double width = 68.0;
  double penalty_area_depth = 16.5;
  double penalty_area_width = 40.32;
  double goal_area_depth = 5.5;
  double goal_area_width = 18.32;
  double center_circle_radius = 9.15;
  double penalty_spot_distance = 11.0;
  double penalty_arc_radius = 9.15;
  double corner_arc_radius = 1.0;
};

// Field lines in the y = 0 plane, origin at the center spot, x along the
// touchlines and z along the goal lines.
struct FieldTemplate {
  double length = 105.0;
  double width = 68.0;
  std::vector<LineSegment> lines;
  std::vector<ArcSegment> arcs;

  static FieldTemplate standard(const FieldDimensions& dims = {});
};

void to_json(nlohmann::json& j, const FieldTemplate& t);
// Accepts {"length","width"} (optionally any FieldDimensions key) plus
// optional "lines": [[[x,y,z],[x,y,z]],...] and "arcs": [{center,radius,start,end}].
void from_json(const nlohmann::json& j, FieldTemplate& t);

// Evenly spaced samples along every primitive, ceil(len / spacing) + 1 per
// primitive, endpoints included.
std::vector<Vec3> sample_template_points(const FieldTemplate& field, double spacing);

struct EdgeSet {
  std::vector<Vec2> points;
  ImageSize image_size;

  // Nonzero pixels become points at their pixel centers.
  static EdgeSet from_mask(const Mask& mask);
  Mask to_mask() const;
};

// Sobel gradient-magnitude threshold on a grayscale image in [0, 1]. Pixels
// where `exclude` is nonzero are never edges.
EdgeSet extract_edges(const Grid<float>& gray, double threshold, const Mask* exclude = nullptr);

// Squared Euclidean distance (in pixels) from each pixel index to the nearest
// edge pixel. Edge points are rasterized to the pixel containing them.
class DistanceMap {
 public:
  DistanceMap() = default;
  explicit DistanceMap(Grid<double> values) : values_(std::move(values)) {}

  ImageSize image_size() const { return values_.size(); }
  const Grid<double>& values() const { return values_; }
  double at(int x, int y) const { return values_(x, y); }
  // Bilinear read at a continuous pixel coordinate (pixel centers at +0.5),
  // clamped to the border.
  double sample(const Vec2& pixel) const;
  DistanceMap smoothed(double sigma) const;

 private:
  Grid<double> values_;
};

DistanceMap build_distance_map(const EdgeSet& edges);

struct Correspondence {
  Vec3 world;  // y = 0
  Vec2 pixel;
};

std::vector<Correspondence> correspondences_from_json(const nlohmann::json& j);
nlohmann::json correspondences_to_json(std::span<const Correspondence> pairs);

// Plane homography by normalized DLT, focal from the orthonormality of the
// first two rotation columns, then a short reprojection refinement.
Camera init_camera_from_correspondences(std::span<const Correspondence> pairs, ImageSize image_size);

struct RefineOptions {
  int max_iterations = 100;
  double relative_tolerance = 1e-8;
  double smoothing_sigma = 1.0;
  // Extra passes at 2x, 4x, ... the smoothing sigma before the final one.
  int coarse_levels = 3;
  double min_visible_fraction = 0.25;
  // Refined focal stays within [f0 / ratio, f0 * ratio] of the initial focal.
  double max_focal_ratio = 1.5;
};

struct RefineResult {
  Camera camera;
  double initial_objective = 0.0;  // on the raw map
  double final_objective = 0.0;    // on the raw map
  int visible_points = 0;
  int iterations = 0;
  std::vector<double> accepted_costs;  // smoothed-map cost per accepted step
};

// Sum of D(T(p; w)) over template points projecting inside the image.
double calibration_objective(const Camera& camera, const DistanceMap& dmap, std::span<const Vec3> points,
                             int* visible = nullptr);

// Minimizes the chamfer objective over focal, rotation and translation.
RefineResult refine_camera(const Camera& init, const DistanceMap& dmap, std::span<const Vec3> template_points,
                           const RefineOptions& options = {});

struct FrameFailure {
  std::size_t frame = 0;
  ErrorCode code = ErrorCode::kInvalidArgument;
  std::string message;
};

struct SequenceCalibration {
  std::vector<Camera> cameras;
  std::vector<RefineResult> refinements;
  std::optional<FrameFailure> failure;
};

// Frame 0 from correspondences, frame k > 0 warm-started from frame k-1.
// Stops at the first failing frame; earlier solutions are kept.
SequenceCalibration calibrate_sequence(std::span<const EdgeSet> frames, std::span<const Correspondence> first_frame_pairs,
                                       std::span<const Vec3> template_points, const RefineOptions& options = {});

}  // namespace soccer3d

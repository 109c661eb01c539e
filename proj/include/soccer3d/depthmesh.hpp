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
#include <string>
#include <vector>

#include "soccer3d/geometry.hpp"

namespace soccer3d {

// Metric camera-space depth with a validity mask.
struct DepthMap {
  Grid<double> depth;
  Mask valid;

  DepthMap() = default;
  explicit DepthMap(ImageSize size) : depth(size, 0.0), valid(size, 0) {}
  ImageSize size() const { return depth.size(); }
  bool is_valid(int x, int y) const { return valid(x, y) != 0; }
  void set(int x, int y, double d) {
    depth(x, y) = d;
    valid(x, y) = 1;
  }
  std::size_t valid_count() const;
};

// Plane-relative depth classes: 0..48 signed offsets, 49 background.
using ClassMap = Grid<std::uint8_t>;

inline constexpr int kPlaneClass = 24;
inline constexpr int kMaxDepthClass = 48;
inline constexpr int kBackgroundClass = 49;
inline constexpr double kDepthBinSpacing = 0.02;

// Offset is depth minus plane depth; positive is behind the plane.
int depth_offset_to_class(double offset);
double class_to_depth_offset(int depth_class);

struct PixelBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  Vec2 bottom_center() const { return {x + width / 2.0, y + height}; }
  Vec2 top_center() const { return {x + width / 2.0, y}; }
};

// Placement of a crop raster inside the frame: map pixel (i, j) has its center
// at origin + ((i + 0.5) * scale.x, (j + 0.5) * scale.y) in frame pixels.
struct CropFrame {
  Vec2 origin = Vec2::Zero();
  Vec2 scale = Vec2::Ones();

  Vec2 frame_pixel(int i, int j) const {
    return {origin.x() + (i + 0.5) * scale.x(), origin.y() + (j + 0.5) * scale.y()};
  }
};

// Vertical plane through the player's ground point, facing the camera.
struct Billboard {
  Vec3 ground_point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double plane_depth = 0.0;  // camera-space depth of ground_point
};

Billboard lift_billboard(const Camera& camera, const PixelBox& bbox);
// Same, with the ground-contact pixel given directly.
Billboard lift_billboard_at(const Camera& camera, const Vec2& contact_pixel);
// Height (meters) of the billboard point under `pixel`, or NaN when the ray
// misses the plane.
double billboard_height_at(const Camera& camera, const Billboard& billboard, const Vec2& pixel);
// Camera-space depth where the pixel ray meets the billboard plane; false when
// the ray is parallel to or points away from the plane.
bool billboard_plane_depth(const Camera& camera, const Billboard& billboard, const Vec2& pixel, double* depth);

// Offsets against the constant plane depth z0 (fronto-parallel approximation).
ClassMap encode_depth(const DepthMap& depth, const Billboard& billboard);
// Offsets against the per-pixel plane depth; the exact inverse of decode_depth.
ClassMap encode_depth(const DepthMap& depth, const Billboard& billboard, const Camera& camera, const CropFrame& crop);

DepthMap decode_depth(const ClassMap& classes, const Billboard& billboard, const Camera& camera, const CropFrame& crop);

struct PlayerMesh {
  std::string name;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec2> uvs;           // [0,1]^2, image convention (v grows downward)
  std::vector<Vec2> source_pixels;  // frame pixel each vertex was lifted from
  std::string texture;              // crop image file referenced by the material
};

struct MeshOptions {
  double discontinuity_threshold = 0.1;  // meters
};

// One vertex per valid masked pixel; two triangles per fully valid 2x2 block
// (one for three valid corners), skipping triangles that span a depth jump.
PlayerMesh build_mesh(const DepthMap& depth, const Mask& mask, const Camera& camera, const CropFrame& crop,
                      const MeshOptions& options = {});

}  // namespace soccer3d

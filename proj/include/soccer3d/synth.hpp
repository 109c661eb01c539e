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

#include <cstdint>
#include <vector>

#include "soccer3d/dataset_extract.hpp"
#include "soccer3d/field_calibration.hpp"
#include "soccer3d/tracking.hpp"

namespace soccer3d {

enum class PrimitiveShape { kBox, kEllipsoid };

// Axis-aligned stand-in for a player standing at `ground` (y = 0).
struct PlayerPrimitive {
  Vec3 ground = Vec3::Zero();
  double width = 0.5;   // along x
  double height = 1.8;  // along y
  double depth = 0.3;   // along z
  PrimitiveShape shape = PrimitiveShape::kBox;
  Rgb color{0.8f, 0.1f, 0.1f};
};

struct SynthNoise {
  double edge_dropout = 0.0;  // probability of dropping an edge pixel
  double pixel_jitter = 0.0;  // sigma of Gaussian jitter on projected line points, pixels
};

struct SynthScene {
  Camera camera;
  double z_near = 1.0;
  double z_far = 400.0;
  std::vector<PlayerPrimitive> players;
  FieldTemplate field = FieldTemplate::standard();
  SynthNoise noise;
  std::uint64_t seed = 0;

  GlCamera glcam() const { return gl_camera_from(camera, z_near, z_far); }
};

struct BroadcastSceneOptions {
  ImageSize image_size{960, 540};
  int players = 0;
  double min_player_spacing = 2.0;  // meters between ground positions
};

// Seeded broadcast-style camera (elevated, behind a touchline) with players
// placed on visible, non-overlapping field positions.
SynthScene make_broadcast_scene(std::uint64_t seed, const BroadcastSceneOptions& options = {});

// Edge pixels of the projected field lines after dropout/jitter.
EdgeSet render_edges(const SynthScene& scene);

enum PixelLabel : std::uint8_t { kLabelOther = 0, kLabelGround = 1, kLabelPlayer = 2 };

struct NdcRender {
  Capture capture;
  Grid<std::uint8_t> labels;  // PixelLabel per pixel
  Grid<int> player_index;     // -1 where no player is hit
  Grid<double> eye_depth;     // camera-space depth, 0 where nothing is hit
};

// Analytic ray cast of the field plane and the player primitives at every
// pixel center.
NdcRender render_ndc(const SynthScene& scene);

// First hit of a world ray against a primitive; returns the ray parameter or a
// negative value.
double intersect_primitive(const PlayerPrimitive& p, const Vec3& origin, const Vec3& direction);
// Signed distance-like test: |value| <= tol means on the primitive surface.
double primitive_surface_residual(const PlayerPrimitive& p, const Vec3& point);

// Image-space box of the primitive's eight corners.
PixelBox projected_bbox(const Camera& camera, const PlayerPrimitive& p);

// Stick-figure keypoints on the primitive's center plane, projected. The
// ankles sit on the ground so their midpoint is the ground contact.
Keypoints synth_keypoints(const Camera& camera, const PlayerPrimitive& p);

// Nearest primitive hit per pixel ray: player index and camera-space depth,
// or -1 when the ray reaches the ground or nothing.
struct PixelHit {
  int player = -1;
  double depth = 0.0;
};
PixelHit cast_pixel(const SynthScene& scene, const Vec2& pixel);

// Ground-truth depth classes of player `index` on a crop raster, relative to
// the billboard (per-pixel plane depth). Pixels showing anything else are 49.
ClassMap render_class_map(const SynthScene& scene, int index, const Billboard& billboard, const CropFrame& crop,
                          ImageSize raster);

struct SequenceOptions {
  int frames = 10;
  double pan_degrees = 0.1;  // camera yaw per frame about its center
  double max_speed = 0.1;    // meters per frame
  BroadcastSceneOptions scene;
};

// Frame 0 is make_broadcast_scene(seed); later frames pan the camera and move
// players linearly, keeping every player fully in view.
std::vector<SynthScene> make_broadcast_sequence(std::uint64_t seed, const SequenceOptions& options = {});

}  // namespace soccer3d

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


#include "soccer3d/depthmesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace soccer3d {

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count_if(valid.storage().begin(), valid.storage().end(), [](std::uint8_t v) { return v != 0; }));
}

int depth_offset_to_class(double offset) {
  if (!std::isfinite(offset)) fail(ErrorCode::kInvalidDepth, "depth offset is not finite");
  const double bin = std::round(offset / kDepthBinSpacing);
  return static_cast<int>(std::clamp(bin + kPlaneClass, 0.0, static_cast<double>(kMaxDepthClass)));
}

double class_to_depth_offset(int depth_class) {
  if (depth_class < 0 || depth_class > kMaxDepthClass) fail(ErrorCode::kInvalidArgument, "depth class out of range");
  return (depth_class - kPlaneClass) * kDepthBinSpacing;
}

Billboard lift_billboard(const Camera& camera, const PixelBox& bbox) { return lift_billboard_at(camera, bbox.bottom_center()); }

Billboard lift_billboard_at(const Camera& camera, const Vec2& contact_pixel) {
  Billboard b;
  b.ground_point = ray_ground_intersect(camera, contact_pixel);
  const Vec3 toward = b.ground_point - camera.center();
  const Vec2 flat(toward.x(), toward.z());
  if (flat.norm() < 1e-12) fail(ErrorCode::kParallelRay, "camera is directly above the contact point");
  b.normal = Vec3(-flat.x(), 0.0, -flat.y()) / flat.norm();
  b.plane_depth = camera.to_camera(b.ground_point).z();
  return b;
}

bool billboard_plane_depth(const Camera& camera, const Billboard& billboard, const Vec2& pixel, double* depth) {
  Vec3 hit;
  if (!ray_plane_intersect(pixel_ray(camera, pixel), billboard.ground_point, billboard.normal, &hit)) return false;
  const double z = camera.to_camera(hit).z();
  if (!(z > 0.0)) return false;
  *depth = z;
  return true;
}

double billboard_height_at(const Camera& camera, const Billboard& billboard, const Vec2& pixel) {
  Vec3 hit;
  if (!ray_plane_intersect(pixel_ray(camera, pixel), billboard.ground_point, billboard.normal, &hit)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return hit.y();
}

ClassMap encode_depth(const DepthMap& depth, const Billboard& billboard) {
  ClassMap out(depth.size(), static_cast<std::uint8_t>(kBackgroundClass));
  for (int y = 0; y < depth.size().height; ++y) {
    for (int x = 0; x < depth.size().width; ++x) {
      if (!depth.is_valid(x, y)) continue;
      out(x, y) = static_cast<std::uint8_t>(depth_offset_to_class(depth.depth(x, y) - billboard.plane_depth));
    }
  }
  return out;
}

ClassMap encode_depth(const DepthMap& depth, const Billboard& billboard, const Camera& camera, const CropFrame& crop) {
  ClassMap out(depth.size(), static_cast<std::uint8_t>(kBackgroundClass));
  for (int y = 0; y < depth.size().height; ++y) {
    for (int x = 0; x < depth.size().width; ++x) {
      double plane = 0.0;
      if (!depth.is_valid(x, y) || !billboard_plane_depth(camera, billboard, crop.frame_pixel(x, y), &plane)) continue;
      out(x, y) = static_cast<std::uint8_t>(depth_offset_to_class(depth.depth(x, y) - plane));
    }
  }
  return out;
}

DepthMap decode_depth(const ClassMap& classes, const Billboard& billboard, const Camera& camera, const CropFrame& crop) {
  DepthMap out(classes.size());
  for (int y = 0; y < classes.height(); ++y) {
    for (int x = 0; x < classes.width(); ++x) {
      const int c = classes(x, y);
      if (c > kBackgroundClass) fail(ErrorCode::kInvalidArgument, "class value above 49");
      if (c == kBackgroundClass) continue;
      double plane = 0.0;
      if (!billboard_plane_depth(camera, billboard, crop.frame_pixel(x, y), &plane)) continue;
      const double z = plane + class_to_depth_offset(c);
      if (z > 0.0) out.set(x, y, z);
    }
  }
  return out;
}

PlayerMesh build_mesh(const DepthMap& depth, const Mask& mask, const Camera& camera, const CropFrame& crop,
                      const MeshOptions& options) {
  require_same_size(depth.depth, mask, "build_mesh");
  const ImageSize size = depth.size();
  PlayerMesh mesh;
  Grid<int> index(size, -1);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      if (!mask(x, y) || !depth.is_valid(x, y)) continue;
      const double z = depth.depth(x, y);
      if (!(z > 0.0)) continue;
      const Vec2 pixel = crop.frame_pixel(x, y);
      index(x, y) = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(unproject(camera, pixel, z));
      mesh.source_pixels.push_back(pixel);
      mesh.uvs.emplace_back((x + 0.5) / size.width, (y + 0.5) / size.height);
    }
  }
  if (mesh.vertices.empty()) fail(ErrorCode::kEmptyPlayer, "no valid masked pixels to mesh");

  const auto try_face = [&](int a, int b, int c, double za, double zb, double zc) {
    const double spread = std::max({za, zb, zc}) - std::min({za, zb, zc});
    if (spread > options.discontinuity_threshold) return;
    const Vec3& pa = mesh.vertices[static_cast<std::size_t>(a)];
    const Vec3& pb = mesh.vertices[static_cast<std::size_t>(b)];
    const Vec3& pc = mesh.vertices[static_cast<std::size_t>(c)];
    if ((pb - pa).cross(pc - pa).norm() * 0.5 <= 1e-12) return;
    mesh.faces.push_back({a, b, c});
  };
  for (int y = 0; y + 1 < size.height; ++y) {
    for (int x = 0; x + 1 < size.width; ++x) {
      // Corners in counter-clockwise image order: top-left, bottom-left,
      // bottom-right, top-right.
      const int cx[4] = {x, x, x + 1, x + 1};
      const int cy[4] = {y, y + 1, y + 1, y};
      int ids[4];
      double zs[4];
      int valid = 0;
      for (int k = 0; k < 4; ++k) {
        ids[k] = index(cx[k], cy[k]);
        zs[k] = ids[k] >= 0 ? depth.depth(cx[k], cy[k]) : 0.0;
        valid += ids[k] >= 0;
      }
      if (valid == 4) {
        try_face(ids[0], ids[1], ids[3], zs[0], zs[1], zs[3]);
        try_face(ids[1], ids[2], ids[3], zs[1], zs[2], zs[3]);
      } else if (valid == 3) {
        int tri[3];
        double tz[3];
        int n = 0;
        for (int k = 0; k < 4; ++k) {
          if (ids[k] < 0) continue;
          tri[n] = ids[k];
          tz[n++] = zs[k];
        }
        try_face(tri[0], tri[1], tri[2], tz[0], tz[1], tz[2]);
      }
    }
  }
  return mesh;
}

}  // namespace soccer3d

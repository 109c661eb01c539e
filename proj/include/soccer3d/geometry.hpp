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

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <json.hpp>

#include "soccer3d/grid.hpp"

namespace soccer3d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// World frame: right-handed, y up, field in the y = 0 plane. Camera frame:
// x right, y down, z forward, so image rows grow downward. A pixel index (i, j)
// covers the continuous square [i, i+1) x [j, j+1); its center is (i+0.5, j+0.5).

Mat3 rotation_from_axis_angle(const Vec3& rvec);
// Canonical axis-angle with angle in [0, pi].
Vec3 axis_angle_from_rotation(const Mat3& rotation);
// Angle of R_a * R_b^T in radians.
double rotation_angle_between(const Mat3& a, const Mat3& b);

// Pinhole broadcast camera: X_cam = R * X_world + t.
struct Camera {
  double focal = 1.0;
  Vec3 rotation = Vec3::Zero();
  Vec3 translation = Vec3::Zero();
  Vec2 principal_point = Vec2::Zero();
  ImageSize image_size;

  // Principal point defaults to the image center.
  static Camera centered(double focal, const Vec3& rotation, const Vec3& translation, ImageSize size);
  // Camera at `eye` looking at `target` with the image x axis horizontal.
  static Camera look_at(double focal, const Vec3& eye, const Vec3& target, ImageSize size);

  Mat3 rotation_matrix() const { return rotation_from_axis_angle(rotation); }
  Vec3 center() const;
  Vec3 to_camera(const Vec3& world) const;
  void validate() const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
};

Vec2 project(const Camera& camera, const Vec3& world);
Vec3 unproject(const Camera& camera, const Vec2& pixel, double depth);
Ray pixel_ray(const Camera& camera, const Vec2& pixel);
Vec3 ray_ground_intersect(const Camera& camera, const Vec2& pixel);
// Intersection of a ray with the plane n . (X - p) = 0; empty when parallel
// (|n . d| < 1e-12) or behind the origin.
bool ray_plane_intersect(const Ray& ray, const Vec3& plane_point, const Vec3& plane_normal, Vec3* hit);

// Modelview + projection pair of a raster pipeline.
struct GlCamera {
  Mat4 modelview = Mat4::Identity();
  Mat4 projection = Mat4::Identity();
  double z_near = 0.1;
  double z_far = 100.0;
  ImageSize image_size;

  void validate() const;
};

Mat4 gl_projection(double focal, ImageSize size, double z_near, double z_far);
// OpenGL eye space looks down -z with y up, so modelview = diag(1,-1,-1,1) [R|t].
Mat4 gl_modelview(const Vec3& rotation, const Vec3& translation);
GlCamera gl_camera_from(const Camera& camera, double z_near, double z_far);

// Convention flags for NDC <-> pixel mapping. With flip_y (default) NDC y is
// 1 - 2v/H; without it, 2v/H - 1.
struct NdcConvention {
  bool flip_y = true;
};

Vec3 pixel_to_ndc(const Vec2& pixel, double depth_value, ImageSize size, NdcConvention convention = {});
Vec2 ndc_to_pixel(const Vec3& ndc, ImageSize size, NdcConvention convention = {});
Vec3 ndc_to_world(const GlCamera& glcam, const Vec2& pixel, double ndc_depth, NdcConvention convention = {});

// Caches (P * MV)^-1 for per-pixel unprojection of whole buffers.
class NdcUnprojector {
 public:
  explicit NdcUnprojector(const GlCamera& glcam, NdcConvention convention = {});
  Vec3 operator()(const Vec2& pixel, double ndc_depth) const;

 private:
  Mat4 inverse_;
  ImageSize size_;
  NdcConvention convention_;
};

// Forward path: clip = P * MV * X, ndc = clip.xyz / clip.w. Returns (u, v, buffer depth).
struct NdcSample {
  Vec2 pixel;
  double depth = 0.0;  // buffer depth in [0, 1] inside the frustum
  double eye_depth = 0.0;  // -z in eye space
};
NdcSample world_to_ndc(const GlCamera& glcam, const Vec3& world, NdcConvention convention = {});

// Camera-space depth of a world point under a GlCamera.
double gl_eye_depth(const GlCamera& glcam, const Vec3& world);

void to_json(nlohmann::json& j, const Camera& camera);
void from_json(const nlohmann::json& j, Camera& camera);
void to_json(nlohmann::json& j, const GlCamera& glcam);
void from_json(const nlohmann::json& j, GlCamera& glcam);

}  // namespace soccer3d

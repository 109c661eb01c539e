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

#include "soccer3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

namespace soccer3d {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kBehindCamera: return "behind-camera";
    case ErrorCode::kInvalidDepth: return "invalid-depth";
    case ErrorCode::kParallelRay: return "parallel-ray";
    case ErrorCode::kIntersectionBehindCamera: return "intersection-behind-camera";
    case ErrorCode::kDegenerateUnprojection: return "degenerate-unprojection";
    case ErrorCode::kSingularCamera: return "singular-camera";
    case ErrorCode::kInvalidFrustum: return "invalid-frustum";
    case ErrorCode::kEmptyEdges: return "empty-edges";
    case ErrorCode::kDegenerateCorrespondences: return "degenerate-correspondences";
    case ErrorCode::kInsufficientVisibility: return "insufficient-visibility";
    case ErrorCode::kDiverged: return "diverged";
    case ErrorCode::kMalformedDetection: return "malformed-detection";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kUnanchoredRegion: return "unanchored-region";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kEmptyPlayer: return "empty-player";
    case ErrorCode::kUnconstrained: return "unconstrained";
    case ErrorCode::kEmptyEvaluation: return "empty-evaluation";
    case ErrorCode::kEmptyRender: return "empty-render";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
  }
  return "unknown";
}

Mat3 rotation_from_axis_angle(const Vec3& rvec) {
  const double angle = rvec.norm();
  if (angle < 1e-15) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, rvec / angle).toRotationMatrix();
}

Vec3 axis_angle_from_rotation(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  Vec3 r = aa.axis() * aa.angle();
  if (aa.angle() > std::numbers::pi) {
    r = aa.axis() * (aa.angle() - 2.0 * std::numbers::pi);
  }
  return r;
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const Mat3 d = a * b.transpose();
  const double c = std::clamp((d.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Camera Camera::centered(double focal, const Vec3& rotation, const Vec3& translation, ImageSize size) {
  Camera c;
  c.focal = focal;
  c.rotation = rotation;
  c.translation = translation;
  c.image_size = size;
  c.principal_point = Vec2(size.width / 2.0, size.height / 2.0);
  return c;
}

Camera Camera::look_at(double focal, const Vec3& eye, const Vec3& target, ImageSize size) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(Vec3::UnitY());
  if (right.norm() < 1e-9) right = Vec3::UnitX();
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return centered(focal, axis_angle_from_rotation(r), -r * eye, size);
}

Vec3 Camera::center() const { return -rotation_matrix().transpose() * translation; }

Vec3 Camera::to_camera(const Vec3& world) const { return rotation_matrix() * world + translation; }

void Camera::validate() const {
  if (!(focal > 0.0) || !std::isfinite(focal)) fail(ErrorCode::kInvalidArgument, "camera focal must be > 0");
  if (image_size.width <= 0 || image_size.height <= 0) fail(ErrorCode::kInvalidArgument, "camera image size must be > 0");
  if (!(rotation.norm() < std::numbers::pi + 1e-9)) fail(ErrorCode::kInvalidArgument, "camera rotation must have magnitude < pi");
}

Vec2 project(const Camera& camera, const Vec3& world) {
  const Vec3 c = camera.to_camera(world);
  if (c.z() <= 1e-9) fail(ErrorCode::kBehindCamera, "point is at or behind the camera plane");
  return camera.principal_point + camera.focal * Vec2(c.x() / c.z(), c.y() / c.z());
}

Vec3 unproject(const Camera& camera, const Vec2& pixel, double depth) {
  if (!(depth > 0.0)) fail(ErrorCode::kInvalidDepth, "unproject requires depth > 0");
  const Vec2 n = (pixel - camera.principal_point) / camera.focal;
  const Vec3 c(n.x() * depth, n.y() * depth, depth);
  return camera.rotation_matrix().transpose() * (c - camera.translation);
}

Ray pixel_ray(const Camera& camera, const Vec2& pixel) {
  const Mat3 r = camera.rotation_matrix();
  const Vec2 n = (pixel - camera.principal_point) / camera.focal;
  Ray ray;
  ray.origin = -r.transpose() * camera.translation;
  ray.direction = (r.transpose() * Vec3(n.x(), n.y(), 1.0)).normalized();
  return ray;
}

Vec3 ray_ground_intersect(const Camera& camera, const Vec2& pixel) {
  const Ray ray = pixel_ray(camera, pixel);
  if (std::abs(ray.direction.y()) < 1e-9) fail(ErrorCode::kParallelRay, "pixel ray is parallel to the ground plane");
  const double s = -ray.origin.y() / ray.direction.y();
  if (s <= 0.0) fail(ErrorCode::kIntersectionBehindCamera, "ground intersection lies behind the camera");
  Vec3 p = ray.origin + s * ray.direction;
  p.y() = 0.0;
  return p;
}

bool ray_plane_intersect(const Ray& ray, const Vec3& plane_point, const Vec3& plane_normal, Vec3* hit) {
  const double denom = plane_normal.dot(ray.direction);
  if (std::abs(denom) < 1e-12) return false;
  const double s = plane_normal.dot(plane_point - ray.origin) / denom;
  if (s <= 0.0) return false;
  *hit = ray.origin + s * ray.direction;
  return true;
}

void GlCamera::validate() const {
  if (!(z_near > 0.0) || !(z_far > z_near)) fail(ErrorCode::kInvalidFrustum, "GlCamera requires 0 < z_near < z_far");
  const Mat3 r = modelview.topLeftCorner<3, 3>();
  if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 || std::abs(r.determinant() - 1.0) > 1e-6) {
    fail(ErrorCode::kSingularCamera, "modelview rotation block is not a rotation");
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const bool slot = (i == j && i < 3) || (i == 2 && j == 3) || (i == 3 && j == 2);
      if (slot != (projection(i, j) != 0.0)) {
        fail(ErrorCode::kSingularCamera, "projection matrix does not have the symmetric perspective pattern");
      }
    }
  }
}

Mat4 gl_projection(double focal, ImageSize size, double z_near, double z_far) {
  if (!(focal > 0.0) || !(z_near > 0.0) || !(z_far > z_near) || size.width <= 0 || size.height <= 0) {
    fail(ErrorCode::kInvalidFrustum, "gl_projection requires focal > 0, 0 < z_near < z_far and a nonempty image");
  }
  Mat4 p = Mat4::Zero();
  p(0, 0) = 2.0 * focal / size.width;
  p(1, 1) = 2.0 * focal / size.height;
  p(2, 2) = -(z_far + z_near) / (z_far - z_near);
  p(2, 3) = -2.0 * z_far * z_near / (z_far - z_near);
  p(3, 2) = -1.0;
  return p;
}

Mat4 gl_modelview(const Vec3& rotation, const Vec3& translation) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_from_axis_angle(rotation);
  m.topRightCorner<3, 1>() = translation;
  m.row(1) *= -1.0;
  m.row(2) *= -1.0;
  return m;
}

GlCamera gl_camera_from(const Camera& camera, double z_near, double z_far) {
  GlCamera g;
  g.modelview = gl_modelview(camera.rotation, camera.translation);
  g.projection = gl_projection(camera.focal, camera.image_size, z_near, z_far);
  g.z_near = z_near;
  g.z_far = z_far;
  g.image_size = camera.image_size;
  return g;
}

Vec3 pixel_to_ndc(const Vec2& pixel, double depth_value, ImageSize size, NdcConvention convention) {
  if (!(depth_value >= 0.0 && depth_value <= 1.0)) fail(ErrorCode::kInvalidDepth, "NDC depth must lie in [0, 1]");
  const double x = 2.0 * pixel.x() / size.width - 1.0;
  const double yd = 2.0 * pixel.y() / size.height - 1.0;
  return {x, convention.flip_y ? -yd : yd, 2.0 * depth_value - 1.0};
}

Vec2 ndc_to_pixel(const Vec3& ndc, ImageSize size, NdcConvention convention) {
  const double yd = convention.flip_y ? -ndc.y() : ndc.y();
  return {(ndc.x() + 1.0) * 0.5 * size.width, (yd + 1.0) * 0.5 * size.height};
}

NdcUnprojector::NdcUnprojector(const GlCamera& glcam, NdcConvention convention)
    : size_(glcam.image_size), convention_(convention) {
  const Eigen::FullPivLU<Mat4> proj_lu(glcam.projection);
  const Eigen::FullPivLU<Mat4> mv_lu(glcam.modelview);
  if (!proj_lu.isInvertible() || !mv_lu.isInvertible()) fail(ErrorCode::kSingularCamera, "GlCamera matrix is singular");
  inverse_ = mv_lu.inverse() * proj_lu.inverse();
}

Vec3 NdcUnprojector::operator()(const Vec2& pixel, double ndc_depth) const {
  const Vec3 ndc = pixel_to_ndc(pixel, ndc_depth, size_, convention_);
  const Vec4 world = inverse_ * Vec4(ndc.x(), ndc.y(), ndc.z(), 1.0);
  if (!(std::abs(world.w()) >= 1e-12)) fail(ErrorCode::kDegenerateUnprojection, "unprojection has w = 0");
  return world.head<3>() / world.w();
}

Vec3 ndc_to_world(const GlCamera& glcam, const Vec2& pixel, double ndc_depth, NdcConvention convention) {
  return NdcUnprojector(glcam, convention)(pixel, ndc_depth);
}

NdcSample world_to_ndc(const GlCamera& glcam, const Vec3& world, NdcConvention convention) {
  const Vec4 eye = glcam.modelview * world.homogeneous();
  const Vec4 clip = glcam.projection * eye;
  if (std::abs(clip.w()) < 1e-12) fail(ErrorCode::kDegenerateUnprojection, "clip w = 0");
  const Vec3 ndc = clip.head<3>() / clip.w();
  NdcSample s;
  s.pixel = ndc_to_pixel(ndc, glcam.image_size, convention);
  s.depth = 0.5 * ndc.z() + 0.5;
  s.eye_depth = -eye.z();
  return s;
}

double gl_eye_depth(const GlCamera& glcam, const Vec3& world) {
  return -(glcam.modelview.row(2).dot(world.homogeneous()));
}

namespace {

template <int N>
Eigen::Matrix<double, N, 1> vec_from_json(const nlohmann::json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != N) fail(ErrorCode::kFormat, std::string("expected ") + std::to_string(N) + " numbers for " + key);
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = a.at(i).get<double>();
  return v;
}

ImageSize size_from_json(const nlohmann::json& j) {
  const auto& a = j.at("image_size");
  if (!a.is_array() || a.size() != 2) fail(ErrorCode::kFormat, "image_size must be [W, H]");
  return {a.at(0).get<int>(), a.at(1).get<int>()};
}

nlohmann::json mat_to_json(const Mat4& m) {
  auto a = nlohmann::json::array();
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) a.push_back(m(i, k));
  return a;
}

Mat4 mat_from_json(const nlohmann::json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 16) fail(ErrorCode::kFormat, std::string(key) + " must hold 16 row-major numbers");
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) m(i, k) = a.at(4 * i + k).get<double>();
  return m;
}

}  // namespace

void to_json(nlohmann::json& j, const Camera& camera) {
  j = {{"focal", camera.focal},
       {"rotation", {camera.rotation.x(), camera.rotation.y(), camera.rotation.z()}},
       {"translation", {camera.translation.x(), camera.translation.y(), camera.translation.z()}},
       {"principal_point", {camera.principal_point.x(), camera.principal_point.y()}},
       {"image_size", {camera.image_size.width, camera.image_size.height}}};
}

void from_json(const nlohmann::json& j, Camera& camera) {
  try {
    camera.focal = j.at("focal").get<double>();
    camera.rotation = vec_from_json<3>(j, "rotation");
    camera.translation = vec_from_json<3>(j, "translation");
    camera.image_size = size_from_json(j);
    if (j.contains("principal_point")) {
      camera.principal_point = vec_from_json<2>(j, "principal_point");
    } else {
      camera.principal_point = Vec2(camera.image_size.width / 2.0, camera.image_size.height / 2.0);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("camera json: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const GlCamera& glcam) {
  j = {{"modelview", mat_to_json(glcam.modelview)},
       {"projection", mat_to_json(glcam.projection)},
       {"z_near", glcam.z_near},
       {"z_far", glcam.z_far},
       {"image_size", {glcam.image_size.width, glcam.image_size.height}}};
}

void from_json(const nlohmann::json& j, GlCamera& glcam) {
  try {
    glcam.modelview = mat_from_json(j, "modelview");
    glcam.projection = mat_from_json(j, "projection");
    glcam.z_near = j.at("z_near").get<double>();
    glcam.z_far = j.at("z_far").get<double>();
    glcam.image_size = size_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("glcamera json: ") + e.what());
  }
}

}  // namespace soccer3d

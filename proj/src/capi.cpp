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


#include "soccer3d.h"

#include <cmath>
#include <cstring>
#include <string>

#include "commands.hpp"
#include "soccer3d/depthmesh.hpp"
#include "soccer3d/geometry.hpp"
#include "soccer3d/metrics.hpp"
#include "soccer3d/trajectory.hpp"

struct s3d_camera {
  soccer3d::Camera camera;
};

namespace {

using soccer3d::ErrorCode;

thread_local std::string g_last_error;

s3d_status to_status(ErrorCode code) { return static_cast<s3d_status>(static_cast<int>(code)); }

// Runs fn, translating exceptions into a status and the thread's last error.
template <typename Fn>
s3d_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const soccer3d::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return S3D_ERR_FORMAT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return S3D_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return S3D_ERR_INTERNAL;
  }
}

void require(bool condition, const char* what) {
  if (!condition) soccer3d::fail(ErrorCode::kInvalidArgument, what);
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

soccer3d::ImageSize checked_size(int width, int height) {
  require(width > 0 && height > 0, "width and height must be positive");
  return {width, height};
}

}  // namespace

extern "C" {

const char* s3d_version(void) { return "0.1.0"; }

const char* s3d_status_name(s3d_status status) {
  switch (status) {
    case S3D_OK:
      return "ok";
    case S3D_ERR_STAGE_FAILED:
      return "stage_failed";
    case S3D_ERR_INTERNAL:
      return "internal";
    default:
      break;
  }
  const int code = static_cast<int>(status);
  if (code >= static_cast<int>(ErrorCode::kInvalidArgument) && code <= static_cast<int>(ErrorCode::kFormat)) {
    return soccer3d::error_code_name(static_cast<ErrorCode>(code));
  }
  return "unknown";
}

const char* s3d_last_error(void) { return g_last_error.c_str(); }

void s3d_string_free(char* s) { delete[] s; }

s3d_status s3d_camera_create(double focal, const double rotation[3], const double translation[3],
                             const double principal_point[2], int width, int height, s3d_camera** out) {
  return guarded([&] {
    require(rotation && translation && principal_point && out, "null argument");
    soccer3d::Camera c;
    c.focal = focal;
    c.rotation = soccer3d::Vec3(rotation[0], rotation[1], rotation[2]);
    c.translation = soccer3d::Vec3(translation[0], translation[1], translation[2]);
    c.principal_point = soccer3d::Vec2(principal_point[0], principal_point[1]);
    c.image_size = checked_size(width, height);
    c.validate();
    *out = new s3d_camera{c};
    return S3D_OK;
  });
}

s3d_status s3d_camera_from_json(const char* json, s3d_camera** out) {
  return guarded([&] {
    require(json && out, "null argument");
    soccer3d::Camera c = nlohmann::json::parse(json).get<soccer3d::Camera>();
    c.validate();
    *out = new s3d_camera{c};
    return S3D_OK;
  });
}

s3d_status s3d_camera_to_json(const s3d_camera* camera, char** json) {
  return guarded([&] {
    require(camera && json, "null argument");
    *json = copy_string(nlohmann::json(camera->camera).dump());
    return S3D_OK;
  });
}

void s3d_camera_destroy(s3d_camera* camera) { delete camera; }

s3d_status s3d_camera_project(const s3d_camera* camera, const double world[3], double pixel[2]) {
  return guarded([&] {
    require(camera && world && pixel, "null argument");
    const soccer3d::Vec2 p = soccer3d::project(camera->camera, soccer3d::Vec3(world[0], world[1], world[2]));
    pixel[0] = p.x();
    pixel[1] = p.y();
    return S3D_OK;
  });
}

s3d_status s3d_camera_unproject(const s3d_camera* camera, const double pixel[2], double depth, double world[3]) {
  return guarded([&] {
    require(camera && pixel && world, "null argument");
    const soccer3d::Vec3 w = soccer3d::unproject(camera->camera, soccer3d::Vec2(pixel[0], pixel[1]), depth);
    for (int i = 0; i < 3; ++i) world[i] = w[i];
    return S3D_OK;
  });
}

s3d_status s3d_camera_ground_intersect(const s3d_camera* camera, const double pixel[2], double world[3]) {
  return guarded([&] {
    require(camera && pixel && world, "null argument");
    const soccer3d::Vec3 w = soccer3d::ray_ground_intersect(camera->camera, soccer3d::Vec2(pixel[0], pixel[1]));
    for (int i = 0; i < 3; ++i) world[i] = w[i];
    return S3D_OK;
  });
}

s3d_status s3d_smooth_trajectory(int n_frames, const int* frames, const double* xyz, size_t n_obs, double smoothness,
                                 double* out_xyz) {
  return guarded([&] {
    require(out_xyz && (n_obs == 0 || (frames && xyz)), "null argument");
    soccer3d::TrajectoryProblem problem;
    problem.n_frames = n_frames;
    problem.smoothness = smoothness;
    for (size_t i = 0; i < n_obs; ++i) {
      if (!problem.observations.emplace(frames[i], soccer3d::Vec3(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2])).second) {
        soccer3d::fail(ErrorCode::kInvalidArgument, "duplicate observation frame " + std::to_string(frames[i]));
      }
    }
    const auto traj = soccer3d::smooth_trajectory(problem);
    for (size_t t = 0; t < traj.size(); ++t) {
      for (int i = 0; i < 3; ++i) out_xyz[3 * t + static_cast<size_t>(i)] = traj[t][i];
    }
    return S3D_OK;
  });
}

s3d_status s3d_iou(const uint8_t* a, const uint8_t* b, int width, int height, double* out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    const soccer3d::ImageSize size = checked_size(width, height);
    soccer3d::Mask ma(size), mb(size);
    std::memcpy(ma.storage().data(), a, size.area());
    std::memcpy(mb.storage().data(), b, size.area());
    *out = soccer3d::iou(ma, mb);
    return S3D_OK;
  });
}

s3d_status s3d_st_rmse(const double* predicted, const double* truth, const uint8_t* mask, int width, int height,
                       double* out) {
  return guarded([&] {
    require(predicted && truth && out, "null argument");
    const soccer3d::ImageSize size = checked_size(width, height);
    const auto wrap = [&](const double* values) {
      soccer3d::DepthMap d(size);
      for (std::size_t i = 0; i < size.area(); ++i) {
        d.depth.storage()[i] = values[i];
        d.valid.storage()[i] = std::isnan(values[i]) ? 0 : 1;
      }
      return d;
    };
    const soccer3d::DepthMap p = wrap(predicted);
    const soccer3d::DepthMap t = wrap(truth);
    if (mask) {
      soccer3d::Mask m(size);
      std::memcpy(m.storage().data(), mask, size.area());
      *out = soccer3d::st_rmse(p, t, &m);
    } else {
      *out = soccer3d::st_rmse(p, t);
    }
    return S3D_OK;
  });
}

int s3d_depth_offset_to_class(double offset) { return soccer3d::depth_offset_to_class(offset); }

s3d_status s3d_class_to_depth_offset(int depth_class, double* offset) {
  return guarded([&] {
    require(offset != nullptr, "null argument");
    *offset = soccer3d::class_to_depth_offset(depth_class);
    return S3D_OK;
  });
}

s3d_status s3d_run_command(const char* name, const char* options_json, char** result_json) {
  return guarded([&] {
    require(name && result_json, "null argument");
    *result_json = nullptr;
    const nlohmann::json options =
        options_json && *options_json ? nlohmann::json::parse(options_json) : nlohmann::json::object();
    const nlohmann::json result = soccer3d::run_command(name, options);
    *result_json = copy_string(result.dump(2));
    if (!result.value("ok", true)) {
      g_last_error = "command reported fatal stage errors";
      return S3D_ERR_STAGE_FAILED;
    }
    return S3D_OK;
  });
}

}  // extern "C"

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


#ifndef SOCCER3D_H_
#define SOCCER3D_H_

#include <stddef.h>
#include <stdint.h>

#if defined(S3D_BUILDING_LIBRARY)
#define S3D_API __attribute__((visibility("default")))
#else
#define S3D_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum s3d_status {
  S3D_OK = 0,
  S3D_ERR_INVALID_ARGUMENT = 1,
  S3D_ERR_BEHIND_CAMERA = 2,
  S3D_ERR_INVALID_DEPTH = 3,
  S3D_ERR_PARALLEL_RAY = 4,
  S3D_ERR_INTERSECTION_BEHIND_CAMERA = 5,
  S3D_ERR_DEGENERATE_UNPROJECTION = 6,
  S3D_ERR_SINGULAR_CAMERA = 7,
  S3D_ERR_INVALID_FRUSTUM = 8,
  S3D_ERR_EMPTY_EDGES = 9,
  S3D_ERR_DEGENERATE_CORRESPONDENCES = 10,
  S3D_ERR_INSUFFICIENT_VISIBILITY = 11,
  S3D_ERR_DIVERGED = 12,
  S3D_ERR_MALFORMED_DETECTION = 13,
  S3D_ERR_DIMENSION_MISMATCH = 14,
  S3D_ERR_UNANCHORED_REGION = 15,
  S3D_ERR_CONVERGENCE = 16,
  S3D_ERR_EMPTY_PLAYER = 17,
  S3D_ERR_UNCONSTRAINED = 18,
  S3D_ERR_EMPTY_EVALUATION = 19,
  S3D_ERR_EMPTY_RENDER = 20,
  S3D_ERR_IO = 21,
  S3D_ERR_FORMAT = 22,
  /* A command finished but reported fatal stage errors; its result is set. */
  S3D_ERR_STAGE_FAILED = 100,
  S3D_ERR_INTERNAL = 101
} s3d_status;

/* Library version string, statically allocated. */
S3D_API const char* s3d_version(void);
/* Symbolic name of a status, statically allocated. */
S3D_API const char* s3d_status_name(s3d_status status);
/* Message of the last failing call on this thread; empty after success. */
S3D_API const char* s3d_last_error(void);
/* Frees strings returned through char** out parameters. */
S3D_API void s3d_string_free(char* s);

/* Pinhole camera, X_cam = R(rotation) * X + translation, y-up world with the
   field on y = 0 and pixel centers at integer + 0.5. */
typedef struct s3d_camera s3d_camera;

S3D_API s3d_status s3d_camera_create(double focal, const double rotation[3], const double translation[3],
                                     const double principal_point[2], int width, int height, s3d_camera** out);
/* Parses {"focal","rotation","translation","principal_point","image_size"}. */
S3D_API s3d_status s3d_camera_from_json(const char* json, s3d_camera** out);
S3D_API s3d_status s3d_camera_to_json(const s3d_camera* camera, char** json);
S3D_API void s3d_camera_destroy(s3d_camera* camera);
S3D_API s3d_status s3d_camera_project(const s3d_camera* camera, const double world[3], double pixel[2]);
/* Point on the pixel's ray at camera-space depth `depth`. */
S3D_API s3d_status s3d_camera_unproject(const s3d_camera* camera, const double pixel[2], double depth, double world[3]);
S3D_API s3d_status s3d_camera_ground_intersect(const s3d_camera* camera, const double pixel[2], double world[3]);

/* Smooths n_obs observations (frame indices with xyz triples) over n_frames;
   writes 3 * n_frames doubles to out_xyz. */
S3D_API s3d_status s3d_smooth_trajectory(int n_frames, const int* frames, const double* xyz, size_t n_obs,
                                         double smoothness, double* out_xyz);

/* Row-major masks, nonzero is set. */
S3D_API s3d_status s3d_iou(const uint8_t* a, const uint8_t* b, int width, int height, double* out);
/* Row-major depths; NaN marks an invalid pixel. `mask` may be NULL to
   evaluate every pixel valid in both maps. */
S3D_API s3d_status s3d_st_rmse(const double* predicted, const double* truth, const uint8_t* mask, int width,
                               int height, double* out);

/* Signed billboard offset in meters to a class in 0..48, clamped. */
S3D_API int s3d_depth_offset_to_class(double offset);
S3D_API s3d_status s3d_class_to_depth_offset(int depth_class, double* offset);

/* Runs a subcommand (synth, calibrate, track, segment, lift, smooth, extract,
   eval, export, run) with JSON options. On S3D_OK or S3D_ERR_STAGE_FAILED,
   *result_json receives a string to release with s3d_string_free. */
S3D_API s3d_status s3d_run_command(const char* name, const char* options_json, char** result_json);

#ifdef __cplusplus
}
#endif

#endif  // SOCCER3D_H_

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

#include <cstddef>
#include <span>
#include <vector>

#include "soccer3d/depthmesh.hpp"
#include "soccer3d/geometry.hpp"

namespace soccer3d {

// Color + NDC depth buffer of one rendered frame and the matrices behind it.
struct Capture {
  RgbImage color;
  Grid<double> ndc_depth;  // buffer depth in [0, 1]
  GlCamera glcam;
};

struct CloudPoint {
  Vec3 world;
  int x = 0;  // source pixel column
  int y = 0;  // source pixel row
};

struct PointCloud {
  std::vector<CloudPoint> points;
  std::size_t dropped = 0;
};

PointCloud extract_point_cloud(const Capture& capture, NdcConvention convention = {});

struct FieldBounds {
  double half_length = 52.5;
  double half_width = 34.0;
  double ground_eps = 0.05;
};

// Keeps points inside the field footprint and above the ground tolerance.
std::vector<CloudPoint> filter_players(std::span<const CloudPoint> points, const FieldBounds& bounds = {});

inline constexpr int kNoise = -1;

// Density clustering. Core points have >= min_pts neighbors within eps (self
// included); clusters are the eps-connected components of core points,
// numbered by their lowest core index; a border point joins the cluster of its
// nearest core neighbor. Noise is kNoise.
std::vector<int> dbscan(std::span<const Vec3> points, double eps = 0.5, int min_pts = 20);

struct CropPair {
  RgbImage image;
  DepthMap depth;  // metric camera-space depth, valid on member pixels only
  int x0 = 0;      // crop origin in the frame
  int y0 = 0;
  int cluster = 0;
  std::size_t cluster_size = 0;
};

struct CropOptions {
  int margin = 10;
  NdcConvention convention;
};

// Per cluster: project members, crop the tight box plus margin (clipped), and
// write metric depth at member pixels. Clusters falling outside the frame are
// skipped and counted in `skipped`.
std::vector<CropPair> emit_crop_pairs(const Capture& capture, std::span<const CloudPoint> points,
                                      std::span<const int> labels, const CropOptions& options = {},
                                      std::size_t* skipped = nullptr);

}  // namespace soccer3d

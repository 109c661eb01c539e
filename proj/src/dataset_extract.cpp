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


#include "soccer3d/dataset_extract.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <unordered_map>

namespace soccer3d {

PointCloud extract_point_cloud(const Capture& capture, NdcConvention convention) {
  require_same_size(capture.color, capture.ndc_depth, "extract_point_cloud");
  if (capture.glcam.image_size != capture.color.size()) fail(ErrorCode::kDimensionMismatch, "capture camera and buffers differ in size");
  const NdcUnprojector unproject_ndc(capture.glcam, convention);
  PointCloud cloud;
  cloud.points.reserve(capture.ndc_depth.size().area());
  for (int y = 0; y < capture.ndc_depth.height(); ++y) {
    for (int x = 0; x < capture.ndc_depth.width(); ++x) {
      try {
        cloud.points.push_back({unproject_ndc(Vec2(x + 0.5, y + 0.5), capture.ndc_depth(x, y)), x, y});
      } catch (const Error&) {
        ++cloud.dropped;
      }
    }
  }
  return cloud;
}

std::vector<CloudPoint> filter_players(std::span<const CloudPoint> points, const FieldBounds& bounds) {
  std::vector<CloudPoint> out;
  for (const CloudPoint& p : points) {
    if (std::abs(p.world.x()) <= bounds.half_length && std::abs(p.world.z()) <= bounds.half_width && p.world.y() > bounds.ground_eps) {
      out.push_back(p);
    }
  }
  return out;
}

namespace {

// Uniform grid with eps-sized cells for radius queries.
class NeighborGrid {
 public:
  NeighborGrid(std::span<const Vec3> points, double eps) : points_(points), eps_(eps) {
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(cell_of(points[i]))].push_back(i);
  }

  // Indices within eps (inclusive), ascending.
  std::vector<std::size_t> query(std::size_t i) const {
    std::vector<std::size_t> out;
    const auto c = cell_of(points_[i]);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == cells_.end()) continue;
          for (std::size_t j : it->second) {
            if ((points_[j] - points_[i]).norm() <= eps_) out.push_back(j);
          }
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::array<long, 3> cell_of(const Vec3& p) const {
    return {static_cast<long>(std::floor(p.x() / eps_)), static_cast<long>(std::floor(p.y() / eps_)),
            static_cast<long>(std::floor(p.z() / eps_))};
  }
  static std::uint64_t key(const std::array<long, 3>& c) {
    const auto h = [](long v) { return static_cast<std::uint64_t>(v) & 0x1FFFFFu; };
    return (h(c[0]) << 42) | (h(c[1]) << 21) | h(c[2]);
  }

  std::span<const Vec3> points_;
  double eps_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace

std::vector<int> dbscan(std::span<const Vec3> points, double eps, int min_pts) {
  if (!(eps > 0.0)) fail(ErrorCode::kInvalidArgument, "dbscan eps must be positive");
  if (min_pts < 1) fail(ErrorCode::kInvalidArgument, "dbscan min_pts must be at least 1");
  for (const Vec3& p : points) {
    if (!p.allFinite()) fail(ErrorCode::kInvalidArgument, "dbscan point is not finite");
  }
  const std::size_t n = points.size();
  const NeighborGrid grid(points, eps);
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i] = grid.query(i);
    core[i] = static_cast<int>(neighbors[i].size()) >= min_pts;
  }

  std::vector<int> labels(n, kNoise);
  int next = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || labels[seed] != kNoise) continue;
    std::deque<std::size_t> queue{seed};
    labels[seed] = next;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      for (std::size_t q : neighbors[p]) {
        if (core[q] && labels[q] == kNoise) {
          labels[q] = next;
          queue.push_back(q);
        }
      }
    }
    ++next;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t q : neighbors[i]) {
      if (!core[q]) continue;
      const double d = (points[q] - points[i]).norm();
      if (d < best) {
        best = d;
        labels[i] = labels[q];
      }
    }
  }
  return labels;
}

std::vector<CropPair> emit_crop_pairs(const Capture& capture, std::span<const CloudPoint> points, std::span<const int> labels,
                                      const CropOptions& options, std::size_t* skipped) {
  if (points.size() != labels.size()) fail(ErrorCode::kDimensionMismatch, "one label per point is required");
  if (options.margin < 0) fail(ErrorCode::kInvalidArgument, "crop margin must be non-negative");
  const ImageSize size = capture.color.size();
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] != kNoise) members[labels[i]].push_back(i);
  }

  std::size_t skip = 0;
  std::vector<CropPair> out;
  for (const auto& [cluster, idx] : members) {
    struct Hit {
      int x, y;
      double depth;
    };
    std::vector<Hit> hits;
    for (std::size_t i : idx) {
      const NdcSample s = world_to_ndc(capture.glcam, points[i].world, options.convention);
      const int x = static_cast<int>(std::floor(s.pixel.x()));
      const int y = static_cast<int>(std::floor(s.pixel.y()));
      if (!size.contains(x, y) || !(s.eye_depth > 0.0)) continue;
      hits.push_back({x, y, s.eye_depth});
    }
    if (hits.empty()) {
      ++skip;
      continue;
    }
    int x0 = size.width, y0 = size.height, x1 = -1, y1 = -1;
    for (const Hit& h : hits) {
      x0 = std::min(x0, h.x);
      y0 = std::min(y0, h.y);
      x1 = std::max(x1, h.x);
      y1 = std::max(y1, h.y);
    }
    x0 = std::max(0, x0 - options.margin);
    y0 = std::max(0, y0 - options.margin);
    x1 = std::min(size.width - 1, x1 + options.margin);
    y1 = std::min(size.height - 1, y1 + options.margin);

    CropPair pair;
    pair.x0 = x0;
    pair.y0 = y0;
    pair.cluster = cluster;
    pair.cluster_size = idx.size();
    const ImageSize crop{x1 - x0 + 1, y1 - y0 + 1};
    pair.image = RgbImage(crop);
    pair.depth = DepthMap(crop);
    for (int y = 0; y < crop.height; ++y) {
      for (int x = 0; x < crop.width; ++x) pair.image(x, y) = capture.color(x0 + x, y0 + y);
    }
    for (const Hit& h : hits) {
      const int cx = h.x - x0;
      const int cy = h.y - y0;
      if (!pair.depth.is_valid(cx, cy) || h.depth < pair.depth.depth(cx, cy)) pair.depth.set(cx, cy, h.depth);
    }
    out.push_back(std::move(pair));
  }
  if (skipped) *skipped = skip;
  return out;
}

}  // namespace soccer3d

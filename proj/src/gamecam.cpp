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


#include "soccer3d/gamecam.hpp"

#include <cmath>
#include <string>

#include "lm.hpp"

namespace soccer3d {
namespace {

using Eigen::VectorXd;

template <typename T>
std::vector<T> stride_subsample(std::span<const T> items, std::size_t cap) {
  if (items.size() <= cap || cap == 0) return {items.begin(), items.end()};
  const std::size_t stride = (items.size() + cap - 1) / cap;
  std::vector<T> out;
  for (std::size_t i = 0; i < items.size(); i += stride) out.push_back(items[i]);
  return out;
}

VectorXd pack(const GameCamParams& p) {
  VectorXd x(9);
  x << p.rotation, p.translation, std::log(p.focal), std::log(p.z_near), std::log(p.z_far - p.z_near);
  return x;
}

GameCamParams unpack(const VectorXd& x) {
  GameCamParams p;
  p.rotation = x.segment<3>(0);
  p.translation = x.segment<3>(3);
  p.focal = std::exp(x(6));
  p.z_near = std::exp(x(7));
  p.z_far = p.z_near + std::exp(x(8));
  return p;
}

Vec2 center_of(const PixelIndex& p) { return {p.x + 0.5, p.y + 0.5}; }

struct Problem {
  std::vector<Vec3> ground_ndc;
  std::vector<Vec3> targets;
  std::vector<Vec3> player_ndc;
  std::vector<Vec2> player_pixels;
  std::size_t dropped = 0;
};

Problem build_problem(const NdcCapture& capture, const Camera& aux, const GameCamOptions& options) {
  capture.validate();
  aux.validate();
  if (aux.image_size != capture.image_size()) fail(ErrorCode::kDimensionMismatch, "aux camera and depth buffer differ in size");
  const GroundTargets all = ground_targets(aux, capture.ground_pixels);
  const std::vector<std::size_t> order = [&] {
    std::vector<std::size_t> idx(all.points.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return stride_subsample<std::size_t>(idx, options.max_ground);
  }();
  Problem pr;
  pr.dropped = all.dropped;
  const ImageSize size = capture.image_size();
  for (std::size_t i : order) {
    const PixelIndex& px = all.pixels[i];
    pr.ground_ndc.push_back(pixel_to_ndc(center_of(px), capture.depth(px.x, px.y), size, options.convention));
    pr.targets.push_back(all.points[i]);
  }
  for (const PixelIndex& px : stride_subsample<PixelIndex>(capture.player_pixels, options.max_player)) {
    pr.player_ndc.push_back(pixel_to_ndc(center_of(px), capture.depth(px.x, px.y), size, options.convention));
    pr.player_pixels.push_back(center_of(px));
  }
  if (pr.ground_ndc.size() < options.min_ground) {
    fail(ErrorCode::kInsufficientVisibility, "only " + std::to_string(pr.ground_ndc.size()) + " usable ground pixels (need " +
                                                 std::to_string(options.min_ground) + ")");
  }
  if (pr.player_ndc.size() < options.min_player) {
    fail(ErrorCode::kInsufficientVisibility, "only " + std::to_string(pr.player_ndc.size()) + " player pixels (need " +
                                                 std::to_string(options.min_player) + ")");
  }
  return pr;
}

// Inverse of P * MV; throws on singular matrices.
Mat4 inverse_matrix(const GameCamParams& p, ImageSize size) {
  const GlCamera g = p.gl_camera(size);
  const Mat4 m = g.projection * g.modelview;
  const Eigen::FullPivLU<Mat4> lu(m);
  if (!lu.isInvertible()) fail(ErrorCode::kSingularCamera, "projection * modelview is singular");
  return lu.inverse();
}

bool unproject_with(const Mat4& inv, const Vec3& ndc, Vec3* out) {
  const Vec4 h = inv * ndc.homogeneous();
  if (!(std::abs(h.w()) > 1e-12)) return false;
  *out = h.head<3>() / h.w();
  return true;
}

// Residual vector: ground offsets (3 per pixel) then sqrt(lambda) * player
// reprojection offsets (2 per pixel).
bool residuals(const Problem& pr, const Camera& aux, ImageSize size, const GameCamParams& p, double lambda, VectorXd& r) {
  Mat4 inv;
  try {
    p.validate();
    inv = inverse_matrix(p, size);
  } catch (const Error&) {
    return false;
  }
  const auto ng = static_cast<Eigen::Index>(pr.ground_ndc.size());
  const auto np = static_cast<Eigen::Index>(pr.player_ndc.size());
  r.resize(3 * ng + (lambda > 0.0 ? 2 * np : 0));
  for (Eigen::Index i = 0; i < ng; ++i) {
    Vec3 x;
    if (!unproject_with(inv, pr.ground_ndc[static_cast<std::size_t>(i)], &x)) return false;
    r.segment<3>(3 * i) = x - pr.targets[static_cast<std::size_t>(i)];
  }
  if (lambda > 0.0) {
    const double w = std::sqrt(lambda);
    const Mat3 rot = aux.rotation_matrix();
    for (Eigen::Index i = 0; i < np; ++i) {
      Vec3 x;
      if (!unproject_with(inv, pr.player_ndc[static_cast<std::size_t>(i)], &x)) return false;
      const Vec3 c = rot * x + aux.translation;
      if (!(c.z() > 1e-9)) return false;
      const Vec2 y = aux.principal_point + aux.focal * Vec2(c.x() / c.z(), c.y() / c.z());
      r.segment<2>(3 * ng + 2 * i) = w * (y - pr.player_pixels[static_cast<std::size_t>(i)]);
    }
  }
  return r.allFinite();
}

struct Terms {
  double ground = 0.0;
  double player = 0.0;
};

Terms split_terms(const Problem& pr, const Camera& aux, ImageSize size, const GameCamParams& p) {
  VectorXd r;
  if (!residuals(pr, aux, size, p, 1.0, r)) fail(ErrorCode::kDiverged, "game camera objective is not finite");
  const auto ng = static_cast<Eigen::Index>(3 * pr.ground_ndc.size());
  return {r.head(ng).squaredNorm(), r.tail(r.size() - ng).squaredNorm()};
}

}  // namespace

NdcCapture NdcCapture::from_labels(Grid<double> depth, const Grid<std::uint8_t>& labels) {
  require_same_size(depth, labels, "NdcCapture labels");
  NdcCapture c;
  c.depth = std::move(depth);
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      if (labels(x, y) == kGameLabelGround) c.ground_pixels.push_back({x, y});
      if (labels(x, y) == kGameLabelPlayer) c.player_pixels.push_back({x, y});
    }
  }
  return c;
}

void NdcCapture::validate() const {
  const ImageSize size = depth.size();
  Grid<std::uint8_t> seen(size, 0);
  const auto mark = [&](const std::vector<PixelIndex>& list, std::uint8_t bit) {
    for (const PixelIndex& p : list) {
      if (!size.contains(p.x, p.y)) fail(ErrorCode::kInvalidArgument, "capture pixel outside the depth buffer");
      if (seen(p.x, p.y) & ~bit) fail(ErrorCode::kInvalidArgument, "ground and player pixel lists overlap");
      seen(p.x, p.y) |= bit;
    }
  };
  mark(ground_pixels, 1);
  mark(player_pixels, 2);
  for (double d : depth.storage()) {
    if (!(d >= 0.0 && d <= 1.0)) fail(ErrorCode::kInvalidDepth, "depth buffer value outside [0, 1]");
  }
}

GameCamParams GameCamParams::from_aux(const Camera& aux) {
  GameCamParams p;
  p.rotation = aux.rotation;
  p.translation = aux.translation;
  p.focal = aux.focal;
  p.z_near = 1.0;
  p.z_far = 1000.0;
  return p;
}

GlCamera GameCamParams::gl_camera(ImageSize size) const {
  validate();
  GlCamera g;
  g.modelview = gl_modelview(rotation, translation);
  g.projection = gl_projection(focal, size, z_near, z_far);
  g.z_near = z_near;
  g.z_far = z_far;
  g.image_size = size;
  return g;
}

void GameCamParams::validate() const {
  if (!(focal > 0.0) || !std::isfinite(focal)) fail(ErrorCode::kInvalidArgument, "game camera focal must be positive");
  if (!(z_near > 0.0) || !(z_far > z_near) || !std::isfinite(z_far)) fail(ErrorCode::kInvalidFrustum, "need 0 < z_near < z_far");
  if (!rotation.allFinite() || !translation.allFinite()) fail(ErrorCode::kInvalidArgument, "game camera pose is not finite");
}

GroundTargets ground_targets(const Camera& aux, std::span<const PixelIndex> ground_pixels) {
  GroundTargets out;
  for (const PixelIndex& p : ground_pixels) {
    try {
      out.points.push_back(ray_ground_intersect(aux, center_of(p)));
      out.pixels.push_back(p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParallelRay && e.code() != ErrorCode::kIntersectionBehindCamera) throw;
      ++out.dropped;
    }
  }
  return out;
}

double game_camera_objective(const NdcCapture& capture, const Camera& aux, const GameCamParams& params,
                             const GameCamOptions& options) {
  const Problem pr = build_problem(capture, aux, options);
  params.validate();
  inverse_matrix(params, capture.image_size());
  const Terms t = split_terms(pr, aux, capture.image_size(), params);
  return t.ground + options.lambda * t.player;
}

GameCamResult recover_game_camera(const NdcCapture& capture, const Camera& aux, const GameCamParams& init,
                                  const GameCamOptions& options) {
  if (!(options.lambda >= 0.0)) fail(ErrorCode::kInvalidArgument, "lambda must be non-negative");
  init.validate();
  const Problem pr = build_problem(capture, aux, options);
  const ImageSize size = capture.image_size();
  inverse_matrix(init, size);

  const auto fn = [&](const VectorXd& x, VectorXd& r) { return residuals(pr, aux, size, unpack(x), options.lambda, r); };
  detail::LmOptions opt;
  opt.max_iterations = options.max_iterations;
  opt.relative_tolerance = options.relative_tolerance;
  const double reach = std::max(1.0, init.translation.norm());
  opt.steps.resize(9);
  opt.steps << 1e-7, 1e-7, 1e-7, 1e-7 * reach, 1e-7 * reach, 1e-7 * reach, 1e-7, 1e-7, 1e-7;
  const detail::LmResult lm = detail::levenberg_marquardt(fn, pack(init), opt);
  if (!lm.finite) fail(ErrorCode::kDiverged, "game camera objective is not finite at the initial parameters");

  GameCamResult out;
  out.params = unpack(lm.params);
  out.glcam = out.params.gl_camera(size);
  out.glcam.validate();
  const Terms t0 = split_terms(pr, aux, size, init);
  const Terms t1 = split_terms(pr, aux, size, out.params);
  out.initial_objective = t0.ground + options.lambda * t0.player;
  out.final_objective = t1.ground + options.lambda * t1.player;
  out.ground_term = t1.ground;
  out.player_term = t1.player;
  out.iterations = lm.iterations;
  out.dropped_targets = pr.dropped;
  out.accepted_costs = lm.accepted_costs;
  return out;
}

}  // namespace soccer3d

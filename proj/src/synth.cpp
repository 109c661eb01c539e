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

#include "soccer3d/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace soccer3d {
namespace {

constexpr double kMiss = -1.0;

struct Box2 {
  double x0, y0, x1, y1;
  bool overlaps(const Box2& o, double pad) const {
    return !(x1 + pad < o.x0 || o.x1 + pad < x0 || y1 + pad < o.y0 || o.y1 + pad < y0);
  }
};

bool projected_box(const Camera& camera, const PlayerPrimitive& p, Box2* out) {
  Box2 b{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
         std::numeric_limits<double>::lowest()};
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner(p.ground.x() + ((i & 1) ? 0.5 : -0.5) * p.width, (i & 2) ? p.height : 0.0,
                      p.ground.z() + ((i & 4) ? 0.5 : -0.5) * p.depth);
    if (camera.to_camera(corner).z() <= 1e-6) return false;
    const Vec2 uv = project(camera, corner);
    b.x0 = std::min(b.x0, uv.x());
    b.y0 = std::min(b.y0, uv.y());
    b.x1 = std::max(b.x1, uv.x());
    b.y1 = std::max(b.y1, uv.y());
  }
  *out = b;
  return true;
}

// Distance from a ground point to the nearest painted line.
double distance_to_markings(const FieldTemplate& field, const Vec3& p) {
  double best = std::numeric_limits<double>::max();
  for (const auto& l : field.lines) {
    const Vec3 ab = l.b - l.a;
    const double t = std::clamp((p - l.a).dot(ab) / std::max(ab.squaredNorm(), 1e-12), 0.0, 1.0);
    best = std::min(best, (l.a + t * ab - p).norm());
  }
  for (const auto& a : field.arcs) {
    const Vec2 d(p.x() - a.center.x(), p.z() - a.center.z());
    double ang = std::atan2(d.y(), d.x());
    const double lo = std::min(a.start_angle, a.end_angle);
    const double hi = std::max(a.start_angle, a.end_angle);
    while (ang < lo) ang += 2.0 * std::numbers::pi;
    while (ang > lo + 2.0 * std::numbers::pi) ang -= 2.0 * std::numbers::pi;
    if (ang <= hi) {
      best = std::min(best, std::abs(d.norm() - a.radius));
    } else {
      for (const double e : {a.start_angle, a.end_angle}) {
        const Vec3 q(a.center.x() + a.radius * std::cos(e), 0.0, a.center.z() + a.radius * std::sin(e));
        best = std::min(best, (q - p).norm());
      }
    }
  }
  return best;
}

}  // namespace

double intersect_primitive(const PlayerPrimitive& p, const Vec3& origin, const Vec3& direction) {
  if (p.shape == PrimitiveShape::kBox) {
    const Vec3 lo(p.ground.x() - p.width / 2.0, 0.0, p.ground.z() - p.depth / 2.0);
    const Vec3 hi(p.ground.x() + p.width / 2.0, p.height, p.ground.z() + p.depth / 2.0);
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      if (std::abs(direction(k)) < 1e-15) {
        if (origin(k) < lo(k) || origin(k) > hi(k)) return kMiss;
        continue;
      }
      double a = (lo(k) - origin(k)) / direction(k);
      double b = (hi(k) - origin(k)) / direction(k);
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
    }
    if (t0 > t1 || t1 <= 0.0) return kMiss;
    return t0 > 0.0 ? t0 : kMiss;
  }
  const Vec3 radii(p.width / 2.0, p.height / 2.0, p.depth / 2.0);
  const Vec3 c(p.ground.x(), p.height / 2.0, p.ground.z());
  const Vec3 o = (origin - c).cwiseQuotient(radii);
  const Vec3 d = direction.cwiseQuotient(radii);
  const double a = d.squaredNorm();
  const double b = 2.0 * o.dot(d);
  const double cc = o.squaredNorm() - 1.0;
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0) return kMiss;
  const double t = (-b - std::sqrt(disc)) / (2.0 * a);
  return t > 0.0 ? t : kMiss;
}

double primitive_surface_residual(const PlayerPrimitive& p, const Vec3& point) {
  if (p.shape == PrimitiveShape::kBox) {
    const Vec3 c(p.ground.x(), p.height / 2.0, p.ground.z());
    const Vec3 half(p.width / 2.0, p.height / 2.0, p.depth / 2.0);
    const Vec3 q = (point - c).cwiseAbs() - half;
    const double outside = q.cwiseMax(0.0).norm();
    const double inside = std::min(q.maxCoeff(), 0.0);
    return outside + inside;
  }
  const Vec3 radii(p.width / 2.0, p.height / 2.0, p.depth / 2.0);
  const Vec3 c(p.ground.x(), p.height / 2.0, p.ground.z());
  return ((point - c).cwiseQuotient(radii).norm() - 1.0) * radii.minCoeff();
}

SynthScene make_broadcast_scene(std::uint64_t seed, const BroadcastSceneOptions& options) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  SynthScene scene;
  scene.seed = seed;
  const ImageSize size = options.image_size;
  const std::vector<Vec3> probe = sample_template_points(scene.field, 1.0);

  for (int attempt = 0;; ++attempt) {
    if (attempt > 1000) fail(ErrorCode::kEmptyRender, "could not place a broadcast camera");
    const Vec3 eye(uni(-15.0, 15.0), uni(14.0, 24.0), uni(-80.0, -65.0));
    const Vec3 target(uni(-15.0, 15.0), 0.0, uni(-6.0, 6.0));
    const double fov = uni(50.0, 60.0) * std::numbers::pi / 180.0;
    const double focal = size.width / 2.0 / std::tan(fov / 2.0);
    scene.camera = Camera::look_at(focal, eye, target, size);
    std::size_t visible = 0;
    for (const Vec3& p : probe) {
      const Vec3 c = scene.camera.to_camera(p);
      if (c.z() <= 1e-6) continue;
      const Vec2 uv = project(scene.camera, p);
      if (uv.x() >= 8 && uv.y() >= 8 && uv.x() < size.width - 8 && uv.y() < size.height - 8) ++visible;
    }
    if (static_cast<double>(visible) >= 0.35 * static_cast<double>(probe.size())) break;
  }

  static constexpr Rgb kPalette[] = {{0.85f, 0.10f, 0.10f}, {0.10f, 0.20f, 0.85f}, {0.95f, 0.85f, 0.10f},
                                     {0.60f, 0.10f, 0.70f}, {0.05f, 0.05f, 0.05f}, {0.95f, 0.55f, 0.10f}};
  std::vector<Box2> boxes;
  for (int k = 0; k < options.players; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < 20000 && !placed; ++attempt) {
      const Vec2 pixel(uni(0.1, 0.9) * size.width, uni(0.35, 0.95) * size.height);
      Vec3 g;
      try {
        g = ray_ground_intersect(scene.camera, pixel);
      } catch (const Error&) {
        continue;
      }
      if (std::abs(g.x()) > 50.0 || std::abs(g.z()) > 32.0) continue;
      PlayerPrimitive p;
      p.ground = g;
      p.height = uni(1.65, 1.95);
      p.width = uni(0.45, 0.6);
      p.depth = uni(0.25, 0.35);
      p.color = kPalette[static_cast<std::size_t>(k) % std::size(kPalette)];
      Box2 b;
      if (!projected_box(scene.camera, p, &b)) continue;
      if (b.x0 < 12 || b.y0 < 12 || b.x1 > size.width - 12 || b.y1 > size.height - 12) continue;
      bool clash = false;
      for (std::size_t i = 0; i < boxes.size() && !clash; ++i) {
        clash = boxes[i].overlaps(b, 6.0) ||
                (scene.players[i].ground - g).norm() < options.min_player_spacing;
      }
      if (clash) continue;
      boxes.push_back(b);
      scene.players.push_back(p);
      placed = true;
    }
    if (!placed) fail(ErrorCode::kEmptyRender, "could not place player " + std::to_string(k));
  }
  return scene;
}

EdgeSet render_edges(const SynthScene& scene) {
  const ImageSize size = scene.camera.image_size;
  std::mt19937_64 rng(scene.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Mask hit(size, 0);
  for (const Vec3& p : sample_template_points(scene.field, 0.02)) {
    const Vec3 c = scene.camera.to_camera(p);
    if (c.z() <= 1e-6) continue;
    Vec2 uv = project(scene.camera, p);
    if (scene.noise.pixel_jitter > 0.0) {
      uv += scene.noise.pixel_jitter * Vec2(jitter(rng), jitter(rng));
    }
    const int x = static_cast<int>(std::floor(uv.x()));
    const int y = static_cast<int>(std::floor(uv.y()));
    if (size.contains(x, y)) hit(x, y) = 1;
  }
  EdgeSet edges;
  edges.image_size = size;
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      if (hit(x, y) == 0) continue;
      if (scene.noise.edge_dropout > 0.0 && coin(rng) < scene.noise.edge_dropout) continue;
      edges.points.emplace_back(x + 0.5, y + 0.5);
    }
  }
  if (edges.points.empty()) fail(ErrorCode::kEmptyRender, "no field line is visible");
  return edges;
}

NdcRender render_ndc(const SynthScene& scene) {
  const GlCamera glcam = scene.glcam();
  glcam.validate();
  const ImageSize size = scene.camera.image_size;
  NdcRender out;
  out.capture.glcam = glcam;
  out.capture.color = RgbImage(size, Rgb{0.55f, 0.6f, 0.65f});
  out.capture.ndc_depth = Grid<double>(size, 1.0);
  out.labels = Grid<std::uint8_t>(size, kLabelOther);
  out.player_index = Grid<int>(size, -1);
  out.eye_depth = Grid<double>(size, 0.0);

  const Mat3 r = scene.camera.rotation_matrix();
  const Vec3 origin = scene.camera.center();
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const Vec2 pixel(x + 0.5, y + 0.5);
      const Vec2 n = (pixel - scene.camera.principal_point) / scene.camera.focal;
      const Vec3 dir = r.transpose() * Vec3(n.x(), n.y(), 1.0);  // camera z component is 1
      double best = std::numeric_limits<double>::infinity();
      int who = -1;
      bool ground = false;
      if (dir.y() < -1e-12) {
        best = -origin.y() / dir.y();
        ground = true;
      }
      for (std::size_t i = 0; i < scene.players.size(); ++i) {
        const double t = intersect_primitive(scene.players[i], origin, dir);
        if (t > 0.0 && t < best) {
          best = t;
          who = static_cast<int>(i);
          ground = false;
        }
      }
      if (!std::isfinite(best)) continue;
      // dir has unit camera-space z, so the ray parameter is the eye depth.
      if (best < scene.z_near || best > scene.z_far) continue;
      Vec3 hit = origin + best * dir;
      if (ground) hit.y() = 0.0;
      const NdcSample s = world_to_ndc(glcam, hit);
      out.capture.ndc_depth(x, y) = std::clamp(s.depth, 0.0, 1.0);
      out.eye_depth(x, y) = best;
      if (who >= 0) {
        out.labels(x, y) = kLabelPlayer;
        out.player_index(x, y) = who;
        out.capture.color(x, y) = scene.players[static_cast<std::size_t>(who)].color;
      } else {
        out.labels(x, y) = kLabelGround;
        const bool line = distance_to_markings(scene.field, hit) < 0.06;
        out.capture.color(x, y) = line ? Rgb{0.95f, 0.95f, 0.95f} : Rgb{0.15f, 0.5f, 0.15f};
      }
    }
  }
  return out;
}

PixelBox projected_bbox(const Camera& camera, const PlayerPrimitive& p) {
  Box2 b;
  if (!projected_box(camera, p, &b)) fail(ErrorCode::kBehindCamera, "player primitive is behind the camera");
  return PixelBox{b.x0, b.y0, b.x1 - b.x0, b.y1 - b.y0};
}

Keypoints synth_keypoints(const Camera& camera, const PlayerPrimitive& p) {
  const double h = p.height;
  const double w = p.width;
  const auto at = [&](double dx, double y) { return Vec3(p.ground.x() + dx, y, p.ground.z()); };
  const std::pair<const char*, Vec3> joints[] = {
      {"head", at(0.0, h)},
      {"neck", at(0.0, 0.86 * h)},
      {"right_shoulder", at(-0.4 * w, 0.82 * h)},
      {"left_shoulder", at(0.4 * w, 0.82 * h)},
      {"right_elbow", at(-0.48 * w, 0.63 * h)},
      {"left_elbow", at(0.48 * w, 0.63 * h)},
      {"right_wrist", at(-0.48 * w, 0.47 * h)},
      {"left_wrist", at(0.48 * w, 0.47 * h)},
      {"right_hip", at(-0.22 * w, 0.52 * h)},
      {"left_hip", at(0.22 * w, 0.52 * h)},
      {"right_knee", at(-0.22 * w, 0.28 * h)},
      {"left_knee", at(0.22 * w, 0.28 * h)},
      {"right_ankle", at(-0.22 * w, 0.0)},
      {"left_ankle", at(0.22 * w, 0.0)},
  };
  Keypoints k;
  for (const auto& [name, world] : joints) k[name] = Keypoint{project(camera, world), 1.0};
  return k;
}

PixelHit cast_pixel(const SynthScene& scene, const Vec2& pixel) {
  const Camera& cam = scene.camera;
  const Vec2 n = (pixel - cam.principal_point) / cam.focal;
  const Vec3 dir = cam.rotation_matrix().transpose() * Vec3(n.x(), n.y(), 1.0);
  const Vec3 origin = cam.center();
  double best = dir.y() < -1e-12 ? -origin.y() / dir.y() : std::numeric_limits<double>::infinity();
  PixelHit hit;
  for (std::size_t i = 0; i < scene.players.size(); ++i) {
    const double t = intersect_primitive(scene.players[i], origin, dir);
    if (t > 0.0 && t < best) {
      best = t;
      hit.player = static_cast<int>(i);
    }
  }
  if (hit.player >= 0) hit.depth = best;
  return hit;
}

ClassMap render_class_map(const SynthScene& scene, int index, const Billboard& billboard, const CropFrame& crop,
                          ImageSize raster) {
  ClassMap out(raster, static_cast<std::uint8_t>(kBackgroundClass));
  for (int j = 0; j < raster.height; ++j) {
    for (int i = 0; i < raster.width; ++i) {
      const Vec2 pixel = crop.frame_pixel(i, j);
      const PixelHit hit = cast_pixel(scene, pixel);
      double plane = 0.0;
      if (hit.player != index || !billboard_plane_depth(scene.camera, billboard, pixel, &plane)) continue;
      out(i, j) = static_cast<std::uint8_t>(depth_offset_to_class(hit.depth - plane));
    }
  }
  return out;
}

std::vector<SynthScene> make_broadcast_sequence(std::uint64_t seed, const SequenceOptions& options) {
  if (options.frames < 1) fail(ErrorCode::kInvalidArgument, "a sequence needs at least one frame");
  const ImageSize size = options.scene.image_size;
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    const SynthScene base = make_broadcast_scene(seed + attempt * 0x100000001ULL, options.scene);
    std::vector<Camera> cameras;
    const Vec3 center = base.camera.center();
    for (int k = 0; k < options.frames; ++k) {
      const double yaw = k * options.pan_degrees * std::numbers::pi / 180.0;
      Camera c = base.camera;
      const Mat3 r = c.rotation_matrix() * rotation_from_axis_angle(Vec3(0.0, yaw, 0.0));
      c.rotation = axis_angle_from_rotation(r);
      c.translation = -r * center;
      cameras.push_back(c);
    }
    std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL ^ attempt);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const auto fits = [&](const PlayerPrimitive& p0, const Vec3& v, const std::vector<std::pair<PlayerPrimitive, Vec3>>& others) {
      for (int k = 0; k < options.frames; ++k) {
        PlayerPrimitive p = p0;
        p.ground += k * v;
        Box2 b;
        if (!projected_box(cameras[static_cast<std::size_t>(k)], p, &b)) return false;
        if (b.x0 < 12 || b.y0 < 12 || b.x1 > size.width - 12 || b.y1 > size.height - 12) return false;
        if (std::abs(p.ground.x()) > 50.0 || std::abs(p.ground.z()) > 32.0) return false;
        for (const auto& [q0, qv] : others) {
          PlayerPrimitive q = q0;
          q.ground += k * qv;
          Box2 c;
          if (!projected_box(cameras[static_cast<std::size_t>(k)], q, &c) || b.overlaps(c, 4.0)) return false;
        }
      }
      return true;
    };
    std::vector<std::pair<PlayerPrimitive, Vec3>> placed;
    bool ok = true;
    for (const PlayerPrimitive& p : base.players) {
      bool done = false;
      for (int tries = 0; tries < 50 && !done; ++tries) {
        Vec3 v(uni(rng), 0.0, uni(rng));
        if (v.norm() > 1.0) v.normalize();
        v *= options.max_speed;
        if (tries == 49) v.setZero();
        if (fits(p, v, placed)) {
          placed.emplace_back(p, v);
          done = true;
        }
      }
      ok = ok && done;
      if (!ok) break;
    }
    if (!ok) continue;
    std::vector<SynthScene> frames;
    for (int k = 0; k < options.frames; ++k) {
      SynthScene s = base;
      s.seed = base.seed + static_cast<std::uint64_t>(k);
      s.camera = cameras[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < s.players.size(); ++i) s.players[i].ground = placed[i].first.ground + k * placed[i].second;
      frames.push_back(std::move(s));
    }
    return frames;
  }
  fail(ErrorCode::kEmptyRender, "could not build a sequence keeping every player in view");
}

}  // namespace soccer3d

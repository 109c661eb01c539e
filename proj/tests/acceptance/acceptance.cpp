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


// Acceptance run: one PASS/FAIL line per criterion. Each criterion is a list of
// named checks with pinned tolerances; a criterion passes when all of its
// checks pass. `--allow-fail ID` keeps a named check out of the exit status
// while still reporting it.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "../oracles.hpp"
#include "../test_util.hpp"
#include "soccer3d/dataset_extract.hpp"
#include "soccer3d/depthmesh.hpp"
#include "soccer3d/field_calibration.hpp"
#include "soccer3d/formats.hpp"
#include "soccer3d/gamecam.hpp"
#include "soccer3d/metrics.hpp"
#include "soccer3d/pipeline.hpp"
#include "soccer3d/segmentation.hpp"
#include "soccer3d/synth.hpp"
#include "soccer3d/tracking.hpp"
#include "soccer3d/trajectory.hpp"

namespace soccer3d {
namespace {

namespace fs = std::filesystem;
using testing::kDeg;
using testing::uniform;

struct Check {
  std::string id;
  bool pass = false;
  std::string detail;
};

class Checks {
 public:
  void add(std::string id, bool pass, std::string detail) { items_.push_back({std::move(id), pass, std::move(detail)}); }
  // Records `value <= limit` with both numbers in the detail.
  void at_most(const std::string& id, const std::string& what, double value, double limit) {
    add(id, value <= limit, what + " " + num(value) + " <= " + num(limit));
  }
  void at_least(const std::string& id, const std::string& what, double value, double limit) {
    add(id, value >= limit, what + " " + num(value) + " >= " + num(limit));
  }
  void exceeds(const std::string& id, const std::string& what, double value, double limit) {
    add(id, value > limit, what + " " + num(value) + " > " + num(limit));
  }
  const std::vector<Check>& items() const { return items_; }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

 private:
  std::vector<Check> items_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Camera and raster-pipeline round trips.
void geometry(Checks& c) {
  std::mt19937_64 rng(1001);
  double pixel_err = 0.0, world_err = 0.0, ndc_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Camera cam = testing::random_camera(rng);
    const Vec2 pixel(uniform(rng, 0, 640), uniform(rng, 0, 480));
    const double depth = uniform(rng, 0.5, 200.0);
    const Vec3 world = unproject(cam, pixel, depth);
    pixel_err = std::max(pixel_err, (project(cam, world) - pixel).norm());
    world_err = std::max(world_err, (unproject(cam, project(cam, world), depth) - world).norm());

    Camera g = cam;
    g.principal_point = Vec2(320, 240);
    const double n = uniform(rng, 0.1, 2.0);
    const GlCamera gl = gl_camera_from(g, n, n * uniform(rng, 50.0, 1000.0));
    const Vec3 in_cam(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), 1.0);
    const double d = uniform(rng, gl.z_near, std::min(gl.z_far, 60.0));
    const Vec3 w = g.rotation_matrix().transpose() * (in_cam * d - g.translation);
    const NdcSample s = world_to_ndc(gl, w);
    ndc_err = std::max(ndc_err, (ndc_to_world(gl, s.pixel, s.depth) - w).norm());
  }
  c.at_most("1.project", "max |project(unproject(u)) - u| px", pixel_err, 1e-6);
  c.at_most("1.unproject", "max |unproject(project(X)) - X| m", world_err, 1e-6);
  c.at_most("1.ndc", "max |ndc_to_world(world_to_ndc(X)) - X| m", ndc_err, 1e-6);

  double plane_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double n = uniform(rng, 0.05, 5.0);
    const double f = n * uniform(rng, 2.0, 5000.0);
    const Mat4 p = gl_projection(uniform(rng, 200, 3000), {640, 480}, n, f);
    const Vec4 a = p * Vec4(0, 0, -n, 1);
    const Vec4 b = p * Vec4(0, 0, -f, 1);
    plane_err = std::max({plane_err, std::abs(a.z() / a.w() + 1.0), std::abs(b.z() / b.w() - 1.0)});
  }
  c.at_most("1.planes", "max near/far NDC z error", plane_err, 1e-12);
}

Camera perturb(const Camera& truth, std::mt19937_64& rng, double degrees, double focal_fraction) {
  Camera c = truth;
  const Mat3 r = testing::small_rotation(testing::random_unit(rng), degrees) * truth.rotation_matrix();
  const Vec3 center = truth.center();
  c.rotation = axis_angle_from_rotation(r);
  c.translation = -r * center;
  c.focal = truth.focal * (1.0 + (uniform(rng, 0, 1) < 0.5 ? -focal_fraction : focal_fraction));
  return c;
}

// 2. Edge-based calibration from a perturbed start.
void calibration(Checks& c) {
  for (const double jitter : {0.0, 1.0}) {
    double rot = 0.0, focal = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SynthScene s = make_broadcast_scene(2000 + seed);
      s.noise.pixel_jitter = jitter;
      const DistanceMap d = build_distance_map(render_edges(s));
      std::mt19937_64 rng(seed);
      const Camera init = perturb(s.camera, rng, 2.0, 0.02);
      const RefineResult r = refine_camera(init, d, sample_template_points(s.field, 0.5));
      rot = std::max(rot, rotation_angle_between(r.camera.rotation_matrix(), s.camera.rotation_matrix()) / kDeg);
      focal = std::max(focal, std::abs(r.camera.focal / s.camera.focal - 1.0));
    }
    const std::string tag = jitter > 0.0 ? "jitter 1px" : "clean";
    c.at_most("2.rotation." + tag, tag + " max rotation error deg", rot, jitter > 0.0 ? 0.5 : 0.2);
    c.at_most("2.focal." + tag, tag + " max focal error", focal, jitter > 0.0 ? 0.02 : 0.005);
  }
}

// 3. Game camera matrices from a 24-bit depth buffer and an aux camera.
void game_camera(Checks& c) {
  double err_weighted = 0.0, err_ground_only = 0.0, ground_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    BroadcastSceneOptions o;
    o.players = 5;
    o.image_size = {480, 270};
    const SynthScene s = make_broadcast_scene(3000 + seed, o);
    const NdcRender r = render_ndc(s);
    Grid<double> depth = r.capture.ndc_depth;
    for (double& v : depth.storage()) v = std::round(v * 16777215.0) / 16777215.0;
    const NdcCapture cap = NdcCapture::from_labels(depth, r.labels);
    const GameCamParams truth{s.camera.rotation, s.camera.translation, s.camera.focal, s.z_near, s.z_far};
    std::mt19937_64 rng(seed);
    GameCamParams init = truth;
    const auto factor = [&] { return uniform(rng, 0, 1) < 0.5 ? 0.95 : 1.05; };
    for (int k = 0; k < 3; ++k) {
      init.rotation(k) *= factor();
      init.translation(k) *= factor();
    }
    init.focal *= factor();
    init.z_near *= factor();
    init.z_far *= factor();

    const NdcUnprojector true_unproject(s.glcam());
    const auto player_error = [&](const GlCamera& g) {
      const NdcUnprojector u(g);
      double e = 0.0;
      for (const PixelIndex& p : cap.player_pixels) {
        const Vec2 px(p.x + 0.5, p.y + 0.5);
        e = std::max(e, (u(px, cap.depth(p.x, p.y)) - true_unproject(px, cap.depth(p.x, p.y))).norm());
      }
      return e;
    };
    GameCamOptions weighted;
    weighted.lambda = 0.01;
    err_weighted = std::max(err_weighted, player_error(recover_game_camera(cap, s.camera, init, weighted).glcam));
    GameCamOptions ground_only;
    ground_only.lambda = 0.0;
    const GameCamResult g = recover_game_camera(cap, s.camera, init, ground_only);
    err_ground_only = std::max(err_ground_only, player_error(g.glcam));
    ground_ratio = std::max(ground_ratio, g.final_objective / g.initial_objective);
  }
  c.at_most("3.lambda0.01", "lambda=0.01 max player point error m", err_weighted, 1e-2);
  c.at_most("3.lambda0.ground", "lambda=0 worst final/initial ground objective", ground_ratio, 1e-3);
  c.exceeds("3.lambda0.degenerate", "lambda=0 max player point error m", err_ground_only, 0.1);
}

// 4. Depth class codec.
void depth_codec(Checks& c) {
  double sweep = 0.0;
  for (int i = -48000; i <= 48000; ++i) {
    const double delta = i * 1e-5;
    sweep = std::max(sweep, std::abs(class_to_depth_offset(depth_offset_to_class(delta)) - delta));
  }
  c.at_most("4.sweep", "max |decode(encode(d)) - d| m over |d| <= 0.48", sweep, 0.01 + 1e-12);
  int exact = 0;
  for (int k = 0; k <= kMaxDepthClass; ++k) exact += depth_offset_to_class(class_to_depth_offset(k)) == k;
  c.add("4.classes", exact == 49, std::to_string(exact) + "/49 classes survive encode(decode(k))");
  const bool span = class_to_depth_offset(0) == -0.48 && class_to_depth_offset(kMaxDepthClass) == 0.48 &&
                    depth_offset_to_class(-10.0) == 0 && depth_offset_to_class(10.0) == kMaxDepthClass;
  c.add("4.span", span, "representable offsets [" + Checks::num(class_to_depth_offset(0)) + ", " +
                            Checks::num(class_to_depth_offset(kMaxDepthClass)) + "] m, clamped outside");

  // Per-pixel plane codec on a real crop.
  const Camera cam = Camera::look_at(1200.0, Vec3(0, 15, -60), Vec3(0, 0, 0), {960, 540});
  const Vec3 ground(5, 0, 10);
  const Billboard b = lift_billboard_at(cam, project(cam, ground));
  const Vec2 top = project(cam, Vec3(5, 2.0, 10));
  const Vec2 foot = project(cam, ground);
  const double h = foot.y() - top.y();
  const ImageSize raster{24, 48};
  const CropFrame crop{Vec2(foot.x() - h / 4, top.y()), Vec2(h / 2 / raster.width, h / raster.height)};
  std::mt19937_64 rng(44);
  DepthMap d(raster);
  for (int j = 0; j < raster.height; ++j) {
    for (int i = 0; i < raster.width; ++i) {
      double z = 0.0;
      billboard_plane_depth(cam, b, crop.frame_pixel(i, j), &z);
      d.set(i, j, z + uniform(rng, -0.48, 0.48));
    }
  }
  const DepthMap back = decode_depth(encode_depth(d, b, cam, crop), b, cam, crop);
  double crop_err = 0.0;
  for (std::size_t k = 0; k < d.depth.storage().size(); ++k) {
    crop_err = std::max(crop_err, std::abs(back.depth.storage()[k] - d.depth.storage()[k]));
  }
  c.at_most("4.crop", "max crop round-trip error m", crop_err, 0.01 + 1e-9);
}

// 5. Harmonic association against a dense solve.
void segmentation(Checks& c) {
  std::mt19937_64 rng(5005);
  double err = 0.0;
  int principle = 0, preserved = 0;
  for (int i = 0; i < 50; ++i) {
    const ImageSize size{6, 6};
    RgbImage img(size);
    for (Rgb& p : img.storage()) {
      p = Rgb{static_cast<float>(uniform(rng, 0, 1)), static_cast<float>(uniform(rng, 0, 1)), static_cast<float>(uniform(rng, 0, 1))};
    }
    Grid<double> edges(size);
    for (double& v : edges.storage()) v = uniform(rng, 0, 1);
    AnchorMap a(size, kAnchorFree);
    std::uniform_int_distribution<int> label(0, 2);
    for (auto& v : a.storage()) {
      if (uniform(rng, 0, 1) < 0.3) v = static_cast<std::uint8_t>(label(rng));
    }
    a(0, 0) = kAnchorPlayer;
    const AssociationField f = solve_association(build_affinity(img, edges), a);
    const Grid<double> ref = testing::association_dense_oracle(img, edges, a);
    double lo = 2.0, hi = 0.0;
    for (auto v : a.storage()) {
      if (v == kAnchorFree) continue;
      lo = std::min<double>(lo, v);
      hi = std::max<double>(hi, v);
    }
    bool ok_principle = true, ok_anchor = true;
    for (std::size_t p = 0; p < a.storage().size(); ++p) {
      const double v = f.values.storage()[p];
      err = std::max(err, std::abs(v - ref.storage()[p]));
      if (a.storage()[p] != kAnchorFree) {
        ok_anchor &= v == a.storage()[p];
      } else {
        ok_principle &= ref.storage()[p] >= lo - 1e-9 && ref.storage()[p] <= hi + 1e-9 && v >= lo - 1e-5 && v <= hi + 1e-5;
      }
    }
    principle += ok_principle;
    preserved += ok_anchor;
  }
  c.at_most("5.oracle", "max |solver - dense oracle|", err, 1e-5);
  c.add("5.principle", principle == 50, std::to_string(principle) + "/50 instances within anchor range");
  c.add("5.anchors", preserved == 50, std::to_string(preserved) + "/50 instances keep anchors exactly");
  Grid<double> field(5, 1);
  field(0, 0) = 0.0;
  field(1, 0) = 0.4999;
  field(2, 0) = 0.5;
  field(3, 0) = 0.5001;
  field(4, 0) = 1.0;
  const Mask m = threshold_mask(field, 0.5);
  const bool threshold = m(0, 0) == 1 && m(1, 0) == 1 && m(2, 0) == 1 && m(3, 0) == 0 && m(4, 0) == 0;
  c.add("5.threshold", threshold, "player where o <= 0.5");
}

// 6. Trajectory smoothing against gradient descent.
void trajectory(Checks& c) {
  std::mt19937_64 rng(6006);
  double err = 0.0;
  for (int i = 0; i < 20; ++i) {
    TrajectoryProblem p;
    p.n_frames = static_cast<int>(uniform(rng, 3, 51));
    p.smoothness = uniform(rng, 0.1, 10.0);
    std::bernoulli_distribution keep(uniform(rng, 0.2, 0.9));
    for (int t = 0; t < p.n_frames; ++t) {
      if (keep(rng)) p.observations[t] = Vec3(uniform(rng, -30, 30), uniform(rng, 0, 2), uniform(rng, -20, 20));
    }
    while (p.observations.size() < 2) {
      p.observations[static_cast<int>(uniform(rng, 0, p.n_frames))] = Vec3(uniform(rng, -30, 30), 1, uniform(rng, -20, 20));
    }
    const auto got = smooth_trajectory(p);
    const auto ref = testing::trajectory_descent_oracle(p);
    for (std::size_t t = 0; t < got.size(); ++t) err = std::max(err, (got[t] - ref[t]).norm());
  }
  c.at_most("6.oracle", "max |solver - descent oracle| m", err, 1e-6);
  TrajectoryProblem line;
  line.n_frames = 40;
  line.smoothness = 3.0;
  for (int t = 0; t < 40; t += 3) line.observations[t] = Vec3(1.0 + 0.1 * t, 0.9, -2.0 + 0.05 * t);
  double fixed = 0.0;
  const auto out = smooth_trajectory(line);
  for (int t = 0; t < 40; ++t) fixed = std::max(fixed, (out[t] - Vec3(1.0 + 0.1 * t, 0.9, -2.0 + 0.05 * t)).norm());
  c.at_most("6.linear", "linear motion deviation m", fixed, 1e-9);
}

Detection neck_at(int frame, const Vec2& neck) {
  Detection d;
  d.frame = frame;
  d.bbox = PixelBox{neck.x() - 10, neck.y() - 20, 20, 120};
  d.keypoints = {{"neck", {neck, 1.0}}};
  return d;
}

// 7. Track merging thresholds and invariants.
void tracking(Checks& c) {
  const auto tracks_for = [](double dist, int gap) {
    const std::vector<Detection> d = {neck_at(0, Vec2(100, 100)), neck_at(gap, Vec2(100 + dist, 100))};
    return merge_tracks(d).size();
  };
  const bool thresholds = tracks_for(49.9, 10) == 1 && tracks_for(50.1, 10) == 2 && tracks_for(49.9, 11) == 2 &&
                          tracks_for(30, 5) == 1 && tracks_for(60, 5) == 2;
  c.add("7.thresholds", thresholds, "merge at 49.9 px/10 frames, none at 50.1 px or 11 frames");

  std::mt19937_64 rng(7007);
  int good = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<Detection> d;
    const int n = static_cast<int>(uniform(rng, 0, 40));
    for (int k = 0; k < n; ++k) {
      d.push_back(neck_at(static_cast<int>(uniform(rng, 0, 25)), Vec2(std::round(uniform(rng, 0, 300)), std::round(uniform(rng, 0, 200)))));
    }
    const auto tracks = merge_tracks(d);
    std::multiset<std::string> in, out;
    for (const Detection& det : d) in.insert(nlohmann::json(det).dump());
    bool ok = true;
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      ok &= tracks[t].id == static_cast<int>(t) && !tracks[t].detections.empty();
      for (std::size_t k = 0; k < tracks[t].detections.size(); ++k) {
        Detection det = tracks[t].detections[k];
        ok &= det.player_id == tracks[t].id;
        if (k > 0) ok &= tracks[t].detections[k - 1].frame < det.frame;
        det.player_id.reset();
        out.insert(nlohmann::json(det).dump());
      }
    }
    ok &= in == out;
    const std::string sig = nlohmann::json(tracks).dump();
    ok &= nlohmann::json(merge_tracks(d)).dump() == sig;
    std::shuffle(d.begin(), d.end(), rng);
    ok &= nlohmann::json(merge_tracks(d)).dump() == sig;
    good += ok;
  }
  c.add("7.fuzz", good == 100, std::to_string(good) + "/100 fuzzed sets partition deterministically");
}

// 8. Point cloud extraction, clustering and crop pairs.
void dataset_extract(Checks& c) {
  std::string counts;
  bool all = true;
  for (int k : {1, 2, 5, 11}) {
    BroadcastSceneOptions o;
    o.players = k;
    o.min_player_spacing = 3.0;
    const SynthScene s = make_broadcast_scene(8000 + static_cast<std::uint64_t>(k), o);
    const NdcRender r = render_ndc(s);
    const auto players = filter_players(extract_point_cloud(r.capture).points);
    std::vector<Vec3> pts;
    for (const CloudPoint& p : players) pts.push_back(p.world);
    const auto pairs = emit_crop_pairs(r.capture, players, dbscan(pts));
    all &= pairs.size() == static_cast<std::size_t>(k);
    counts += (counts.empty() ? "" : ", ") + std::to_string(k) + "->" + std::to_string(pairs.size());
  }
  c.add("8.crops", all, "players->crop pairs " + counts);

  std::mt19937_64 rng(8008);
  int same = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> pts;
    const int clusters = static_cast<int>(uniform(rng, 1, 5));
    for (int k = 0; k < clusters; ++k) {
      const Vec3 center(uniform(rng, -4, 4), uniform(rng, 0, 2), uniform(rng, -4, 4));
      const int n = static_cast<int>(uniform(rng, 5, 40));
      const double radius = uniform(rng, 0.2, 1.0);
      for (int i = 0; i < n; ++i) pts.push_back(center + radius * testing::random_unit(rng) * uniform(rng, 0, 1));
    }
    for (int k = 0; k < 10; ++k) pts.push_back(Vec3(uniform(rng, -6, 6), uniform(rng, 0, 2), uniform(rng, -6, 6)));
    const double eps = uniform(rng, 0.2, 0.8);
    const int min_pts = static_cast<int>(uniform(rng, 2, 10));
    same += dbscan(pts, eps, min_pts) == testing::dbscan_closure_oracle(pts, eps, min_pts);
  }
  c.add("8.dbscan", same == 50, std::to_string(same) + "/50 random sets equal the closure oracle");
}

// 9. Scale-invariant depth error and IoU.
void metrics(Checks& c) {
  std::mt19937_64 rng(9009);
  double drift = 0.0;
  for (int i = 0; i < 20; ++i) {
    DepthMap gt(ImageSize{16, 12}), pred(ImageSize{16, 12});
    for (int y = 0; y < 12; ++y) {
      for (int x = 0; x < 16; ++x) {
        gt.set(x, y, uniform(rng, 0.5, 60.0));
        pred.set(x, y, uniform(rng, 0.5, 60.0));
      }
    }
    const double base = st_rmse(pred, gt);
    for (double s : {0.1, 1.0, 10.0}) {
      DepthMap scaled = pred;
      for (double& v : scaled.depth.storage()) v *= s;
      drift = std::max(drift, std::abs(st_rmse(scaled, gt) - base));
    }
  }
  c.at_most("9.scale", "max st-RMSE change under scaling", drift, 1e-12);

  // Hand-computed: log ratios {0, 0, ln 2, ln 2} have mean ln2/2 and every
  // deviation is ln2/2.
  DepthMap p(ImageSize{2, 2}), t(ImageSize{2, 2});
  t.set(0, 0, 1.0);
  t.set(1, 0, 2.0);
  t.set(0, 1, 3.0);
  t.set(1, 1, 4.0);
  p.set(0, 0, 1.0);
  p.set(1, 0, 2.0);
  p.set(0, 1, 6.0);
  p.set(1, 1, 8.0);
  const double hand = std::abs(st_rmse(p, t) - std::log(2.0) / 2.0);
  c.at_most("9.hand", "st-RMSE hand fixture error", hand, 1e-12);

  Mask a(ImageSize{4, 4}, 0), b(ImageSize{4, 4}, 0);
  const bool empty_one = iou(a, b) == 1.0;
  a(0, 0) = a(1, 0) = a(0, 1) = a(1, 1) = 1;
  b(1, 0) = b(2, 0) = b(1, 1) = b(2, 1) = 1;
  const bool fixtures = empty_one && iou(a, a) == 1.0 && iou(a, b) == 2.0 / 6.0 && iou(a, Mask(ImageSize{4, 4}, 0)) == 0.0;
  c.add("9.iou", fixtures, "IoU fixtures {1, 1, 2/6, 0} exact");
}

// 10. Full pipeline on a seeded 10-frame scene.
void end_to_end(Checks& c, const fs::path& work, bool keep) {
  fs::remove_all(work);
  SynthDatasetOptions o;
  o.seed = 10;
  o.frames = 10;
  const fs::path manifest = write_synth_dataset(o, work / "data");
  const ReconstructionBundle b = run_pipeline(load_manifest(manifest), work / "out");
  c.add("10.report", b.report.ok() && b.report.calibrated_frames == o.frames,
        "pipeline ok with " + std::to_string(b.report.calibrated_frames) + "/" + std::to_string(o.frames) + " frames calibrated");

  const nlohmann::json truth = read_json(work / "data" / "truth.json");
  double worst = 0.0;
  for (const PlayerRecord& p : b.players) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& tp : truth.at("frames").at(p.frame).at("players")) {
      const Vec3 g(tp.at("ground")[0].get<double>(), tp.at("ground")[1].get<double>(), tp.at("ground")[2].get<double>());
      best = std::min(best, (g - p.ground).norm());
    }
    worst = std::max(worst, best);
  }
  const std::size_t expected = static_cast<std::size_t>(o.frames * o.players);
  c.add("10.players", b.players.size() == expected,
        std::to_string(b.players.size()) + "/" + std::to_string(expected) + " players reconstructed");
  c.at_most("10.ground", "worst ground position error m", worst, 0.05);

  std::size_t parsed = 0, objects = 0;
  bool valid = true;
  for (const auto& e : fs::directory_iterator(work / "out" / "meshes")) {
    if (e.path().extension() != ".obj") continue;
    const ObjScene s = read_obj(e.path());
    ++parsed;
    for (const ObjObject& obj : s.objects) {
      ++objects;
      valid &= obj.uvs.size() == obj.vertices.size() && !obj.faces.empty();
      for (const Vec3& v : obj.vertices) valid &= v.allFinite();
      for (const auto& f : obj.faces) {
        for (int k : f) valid &= k >= 0 && static_cast<std::size_t>(k) < obj.vertices.size();
      }
      if (obj.name != "field") valid &= fs::exists(e.path().parent_path() / obj.texture);
    }
  }
  c.add("10.obj", valid && parsed == static_cast<std::size_t>(o.frames) && objects == expected + parsed,
        std::to_string(parsed) + " OBJ files re-parsed with " + std::to_string(objects) + " valid objects");
  if (!keep) fs::remove_all(work);
}

struct Criterion {
  int number;
  std::string title;
  double budget_seconds;  // 0 when unbounded
  std::function<void(Checks&)> run;
};

}  // namespace
}  // namespace soccer3d

int main(int argc, char** argv) {
  using namespace soccer3d;
  CLI::App app{"soccer3d acceptance run"};
  std::vector<int> only;
  std::vector<std::string> allowed;
  std::string work = (fs::temp_directory_path() / ("soccer3d_acceptance_" + std::to_string(::getpid()))).string();
  bool keep = false;
  bool verbose = false;
  app.add_option("--only", only, "Criterion numbers to run (default all)");
  app.add_option("--allow-fail", allowed, "Check ids reported but excluded from the exit status");
  app.add_option("--work-dir", work, "Scratch directory for the end-to-end run");
  app.add_flag("--keep", keep, "Keep the end-to-end scratch directory");
  app.add_flag("-v,--verbose", verbose, "Print every check");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "geometry round trips", 1.0, geometry},
      {2, "calibration recovery", 30.0, calibration},
      {3, "game camera recovery", 60.0, game_camera},
      {4, "depth class codec", 0.0, depth_codec},
      {5, "association solver", 0.0, segmentation},
      {6, "trajectory smoothing", 0.0, trajectory},
      {7, "track merging", 0.0, tracking},
      {8, "dataset extraction", 0.0, dataset_extract},
      {9, "depth and mask metrics", 0.0, metrics},
      {10, "end-to-end reconstruction", 120.0, [&](Checks& c) { end_to_end(c, work, keep); }},
  };

  const std::set<std::string> excused(allowed.begin(), allowed.end());
  int failed = 0, excused_failures = 0;
  for (const Criterion& cr : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), cr.number) == only.end()) continue;
    Checks checks;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(checks);
    } catch (const std::exception& e) {
      checks.add(std::to_string(cr.number) + ".error", false, std::string("threw: ") + e.what());
    }
    const double elapsed = soccer3d::seconds_since(t0);
    if (cr.budget_seconds > 0.0) checks.at_most(std::to_string(cr.number) + ".runtime", "runtime s", elapsed, cr.budget_seconds);

    bool pass = true;
    std::vector<std::string> notes;
    for (const Check& ch : checks.items()) {
      pass &= ch.pass;
      if (!ch.pass) {
        if (excused.count(ch.id)) {
          ++excused_failures;
        } else {
          ++failed;
        }
        notes.push_back(ch.id + ": " + ch.detail + (excused.count(ch.id) ? " [known deviation]" : ""));
      } else if (verbose) {
        notes.push_back(ch.id + ": " + ch.detail);
      }
    }
    std::printf("%s %2d %-26s %7.2f s  %zu checks\n", pass ? "PASS" : "FAIL", cr.number, cr.title.c_str(), elapsed,
                checks.items().size());
    for (const std::string& n : notes) std::printf("       %s\n", n.c_str());
    std::fflush(stdout);
  }
  if (excused_failures > 0) std::printf("%d failing check(s) excluded from the exit status by --allow-fail\n", excused_failures);
  return failed == 0 ? 0 : 1;
}

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


#include "soccer3d/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>
#include <tuple>

#include "soccer3d/formats.hpp"
#include "soccer3d/segmentation.hpp"
#include "soccer3d/synth.hpp"
#include "soccer3d/trajectory.hpp"

namespace soccer3d {
namespace fs = std::filesystem;

namespace {

std::string frame_stem(int frame) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", frame);
  return buf;
}

std::string detection_stem(int frame, int track) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "f%06d_t%03d", frame, track);
  return buf;
}

fs::path resolve(const fs::path& base, const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  const fs::path p = j.at(key).get<std::string>();
  return p.is_absolute() ? p : base / p;
}

double box_iou(const PixelBox& a, const PixelBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

// Runs fn(i) for i in [0, n) on `workers` threads; results land by index so
// output order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min<int>(workers, static_cast<int>(n)); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<StageTiming>& sink) : sink_(sink) {}
  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    sink_.push_back({stage, std::chrono::duration<double>(now - start_).count()});
    start_ = now;
  }

 private:
  std::vector<StageTiming>& sink_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct ClassEntry {
  fs::path file;
  CropFrame crop;
  ImageSize raster;
  PixelBox box;
};

std::vector<ClassEntry> load_class_entries(const fs::path& path) {
  std::vector<ClassEntry> out;
  if (path.empty()) return out;
  const nlohmann::json j = read_json(path);
  try {
    for (const auto& e : j.at("class_maps")) {
      ClassEntry c;
      const fs::path f = e.at("file").get<std::string>();
      c.file = f.is_absolute() ? f : path.parent_path() / f;
      c.crop.origin = Vec2(e.at("origin")[0].get<double>(), e.at("origin")[1].get<double>());
      c.crop.scale = Vec2(e.at("scale")[0].get<double>(), e.at("scale")[1].get<double>());
      c.raster = ImageSize{e.at("size")[0].get<int>(), e.at("size")[1].get<int>()};
      c.box = PixelBox{c.crop.origin.x(), c.crop.origin.y(), c.raster.width * c.crop.scale.x(),
                       c.raster.height * c.crop.scale.y()};
      out.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  return out;
}

struct DetectionWork {
  int frame = 0;
  int track = 0;
  const Detection* detection = nullptr;
};

// Tracked detections in (frame, track) order, the order every per-detection
// stage iterates and reports in.
std::vector<DetectionWork> work_items(const std::vector<Track>& tracks) {
  std::vector<DetectionWork> work;
  for (const Track& t : tracks) {
    for (const Detection& d : t.detections) work.push_back({d.frame, t.id, &d});
  }
  std::stable_sort(work.begin(), work.end(), [](const DetectionWork& a, const DetectionWork& b) {
    return std::tie(a.frame, a.track) < std::tie(b.frame, b.track);
  });
  return work;
}

// Indices into `work` grouped by frame.
std::map<int, std::vector<std::size_t>> by_frame(const std::vector<DetectionWork>& work) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < work.size(); ++i) out[work[i].frame].push_back(i);
  return out;
}

RgbImage load_frame_image(const SceneManifest& m, int frame) {
  const fs::path& path = m.frames.at(static_cast<std::size_t>(frame)).image;
  RgbImage image = read_png_rgb(path);
  if (image.size() != m.image_size) fail(ErrorCode::kDimensionMismatch, path.string() + ": size differs from the manifest");
  return image;
}

SegmentRecord segment_detection(const RgbImage& frame, const Mask& person, const DetectionWork& work,
                                std::span<const Detection* const> others, const PipelineParams& params) {
  const Detection& det = *work.detection;
  const ImageSize size = frame.size();
  SegmentRecord rec;
  rec.frame = work.frame;
  rec.track = work.track;
  rec.x0 = std::clamp(static_cast<int>(std::floor(det.bbox.x)), 0, size.width - 1);
  rec.y0 = std::clamp(static_cast<int>(std::floor(det.bbox.y)), 0, size.height - 1);
  const int x1 = std::clamp(static_cast<int>(std::ceil(det.bbox.x + det.bbox.width)), rec.x0 + 1, size.width);
  const int y1 = std::clamp(static_cast<int>(std::ceil(det.bbox.y + det.bbox.height)), rec.y0 + 1, size.height);
  const ImageSize crop{x1 - rec.x0, y1 - rec.y0};
  RgbImage image(crop);
  for (int y = 0; y < crop.height; ++y) {
    for (int x = 0; x < crop.width; ++x) image(x, y) = frame(rec.x0 + x, rec.y0 + y);
  }
  const Vec2 shift(rec.x0, rec.y0);
  const auto shifted = [&](const Keypoints& k) {
    auto bones = detection_bones(k);
    for (auto& b : bones) {
      b[0] -= shift;
      b[1] -= shift;
    }
    return bones;
  };
  AnchorMap anchors(crop, kAnchorFree);
  draw_skeleton_anchors(anchors, shifted(det.keypoints), kAnchorPlayer, params.anchor_radius);
  const auto& cells = anchors.storage();
  if (std::find(cells.begin(), cells.end(), kAnchorPlayer) == cells.end()) {
    fail(ErrorCode::kUnanchoredRegion, "detection skeleton leaves no player anchor inside its box");
  }
  for (const Detection* o : others) draw_skeleton_anchors(anchors, shifted(o->keypoints), kAnchorOther, params.anchor_radius);
  // Without a person mask the crop border stands in for background.
  Mask cnn(crop, 1);
  for (int y = 0; y < crop.height; ++y) {
    for (int x = 0; x < crop.width; ++x) {
      const bool border = x == 0 || y == 0 || x == crop.width - 1 || y == crop.height - 1;
      bool background = border;
      if (!person.empty()) {
        cnn(x, y) = person(rec.x0 + x, rec.y0 + y) ? 1 : 0;
        background = cnn(x, y) == 0;
      }
      if (background && anchors(x, y) == kAnchorFree) anchors(x, y) = kAnchorBackground;
    }
  }
  const AssociationField field = solve_association(build_affinity(image, edge_strength(image)), anchors);
  rec.mask = combine_masks(threshold_mask(field.values, params.tau), cnn);
  return rec;
}

struct LiftItem {
  std::optional<PlayerRecord> record;
  std::optional<PlayerMesh> mesh;
  RgbImage texture;
  std::vector<StageError> errors;
};

LiftItem lift_detection(const DetectionWork& work, const Camera& camera, const RgbImage& frame,
                        const std::vector<ClassEntry>& classes, const SegmentRecord* segment, const PipelineParams& params) {
  LiftItem out;
  const Detection& det = *work.detection;
  const auto error = [&](const std::string& stage, const std::string& message) {
    out.errors.push_back({stage, work.frame, work.track, message, false});
  };

  PlayerRecord rec;
  rec.frame = work.frame;
  rec.track = work.track;
  rec.bbox = det.bbox;
  Billboard billboard;
  try {
    billboard = lift_billboard_at(camera, ground_contact(det));
    rec.ground = billboard.ground_point;
    const Vec2 center = det.bbox.bottom_center() - Vec2(0.0, det.bbox.height / 2.0);
    Vec3 hit;
    if (!ray_plane_intersect(pixel_ray(camera, center), billboard.ground_point, billboard.normal, &hit)) {
      fail(ErrorCode::kParallelRay, "box center ray misses the billboard");
    }
    rec.center = hit;
  } catch (const Error& e) {
    error("lift", e.what());
    return out;
  }
  out.record = rec;
  if (!segment) return out;

  const ClassEntry* match = nullptr;
  double best = params.class_match_iou;
  for (const ClassEntry& c : classes) {
    const double v = box_iou(c.box, det.bbox);
    if (v >= best) {
      best = v;
      match = &c;
    }
  }
  if (!match) {
    if (!classes.empty()) error("decode", "no depth-class map overlaps the detection box");
    return out;
  }
  try {
    const ClassMap cm = read_class_map(match->file);
    if (cm.size() != match->raster) {
      fail(ErrorCode::kDimensionMismatch, match->file.string() + ": size differs from its placement");
    }
    const DepthMap depth = decode_depth(cm, billboard, camera, match->crop);
    Mask raster_mask(cm.size(), 0);
    for (int j = 0; j < cm.height(); ++j) {
      for (int i = 0; i < cm.width(); ++i) {
        const Vec2 p = match->crop.frame_pixel(i, j);
        const int mx = static_cast<int>(std::floor(p.x())) - segment->x0;
        const int my = static_cast<int>(std::floor(p.y())) - segment->y0;
        if (segment->mask.size().contains(mx, my)) raster_mask(i, j) = segment->mask(mx, my);
      }
    }
    PlayerMesh mesh = build_mesh(depth, raster_mask, camera, match->crop, params.mesh);
    mesh.name = detection_stem(work.frame, work.track);
    mesh.texture = "textures/" + mesh.name + ".png";
    // Twice the class-map resolution so uv (i + 0.5) / w lands on the matching
    // frame pixel.
    const ImageSize tex{2 * cm.width(), 2 * cm.height()};
    out.texture = RgbImage(tex);
    const ImageSize fsize = frame.size();
    for (int j = 0; j < tex.height; ++j) {
      for (int i = 0; i < tex.width; ++i) {
        const Vec2 p = match->crop.origin +
                       Vec2((i + 0.5) / 2.0 * match->crop.scale.x(), (j + 0.5) / 2.0 * match->crop.scale.y());
        const int fx = std::clamp(static_cast<int>(std::floor(p.x())), 0, fsize.width - 1);
        const int fy = std::clamp(static_cast<int>(std::floor(p.y())), 0, fsize.height - 1);
        out.texture(i, j) = frame(fx, fy);
      }
    }
    out.record->mesh = mesh.name;
    out.record->vertices = mesh.vertices.size();
    out.record->faces = mesh.faces.size();
    out.mesh = std::move(mesh);
  } catch (const Error& e) {
    error("mesh", e.what());
  }
  return out;
}

nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec3_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

bool PipelineReport::ok() const {
  return std::none_of(errors.begin(), errors.end(), [](const StageError& e) { return e.fatal; });
}

nlohmann::json report_to_json(const PipelineReport& r) {
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : r.errors) {
    errors.push_back({{"stage", e.stage}, {"frame", e.frame}, {"track", e.detection}, {"message", e.message}, {"fatal", e.fatal}});
  }
  return {{"frames", r.frames},
          {"calibrated_frames", r.calibrated_frames},
          {"detections_in", r.detections_in},
          {"detections_dropped", r.detections_dropped},
          {"detections_tracked", r.detections_tracked},
          {"tracks", r.tracks},
          {"meshes", r.meshes},
          {"mesh_vertices", r.mesh_vertices},
          {"errors", errors},
          {"ok", r.ok()}};
}

const std::vector<std::string>& pipeline_param_names() {
  static const std::vector<std::string> names = {"edge_spacing", "smoothing_sigma", "max_iterations", "padding",
                                                 "min_height", "max_height", "dist_thresh", "frame_window",
                                                 "tau", "anchor_radius", "discontinuity", "smoothness",
                                                 "class_match_iou", "workers"};
  return names;
}

void apply_params(const nlohmann::json& j, PipelineParams& p) {
  const auto& names = pipeline_param_names();
  if (!j.is_object()) fail(ErrorCode::kFormat, "pipeline parameters must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(names.begin(), names.end(), key) == names.end()) fail(ErrorCode::kFormat, "unknown pipeline parameter '" + key + "'");
  }
  try {
    p.edge_spacing = j.value("edge_spacing", p.edge_spacing);
    p.refine.smoothing_sigma = j.value("smoothing_sigma", p.refine.smoothing_sigma);
    p.refine.max_iterations = j.value("max_iterations", p.refine.max_iterations);
    p.boxes.padding = j.value("padding", p.boxes.padding);
    p.boxes.min_height = j.value("min_height", p.boxes.min_height);
    p.boxes.max_height = j.value("max_height", p.boxes.max_height);
    p.merge.distance_threshold = j.value("dist_thresh", p.merge.distance_threshold);
    p.merge.frame_window = j.value("frame_window", p.merge.frame_window);
    p.tau = j.value("tau", p.tau);
    p.anchor_radius = j.value("anchor_radius", p.anchor_radius);
    p.mesh.discontinuity_threshold = j.value("discontinuity", p.mesh.discontinuity_threshold);
    p.smoothness = j.value("smoothness", p.smoothness);
    p.class_match_iou = j.value("class_match_iou", p.class_match_iou);
    p.workers = j.value("workers", p.workers);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("pipeline parameter: ") + e.what());
  }
  if (p.workers < 1) fail(ErrorCode::kInvalidArgument, "workers must be at least 1");
}

SceneManifest load_manifest(const fs::path& path) {
  const nlohmann::json j = read_json(path);
  const fs::path base = path.parent_path();
  SceneManifest m;
  try {
    m.image_size = ImageSize{j.at("image_size")[0].get<int>(), j.at("image_size")[1].get<int>()};
    if (m.image_size.width <= 0 || m.image_size.height <= 0) fail(ErrorCode::kFormat, "image_size must be positive");
    m.correspondences = resolve(base, j, "correspondences");
    m.cameras = resolve(base, j, "cameras");
    if (j.contains("field")) m.field = j.at("field").get<FieldTemplate>();
    if (j.contains("params")) apply_params(j.at("params"), m.params);
    for (const auto& f : j.at("frames")) {
      FrameInputs in;
      in.image = resolve(base, f, "image");
      in.edges = resolve(base, f, "edges");
      in.detections = resolve(base, f, "detections");
      in.poses = resolve(base, f, "poses");
      in.person_mask = resolve(base, f, "person_mask");
      in.depth_classes = resolve(base, f, "depth_classes");
      m.frames.push_back(std::move(in));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  if (m.frames.empty()) fail(ErrorCode::kFormat, path.string() + ": manifest lists no frames");
  if (m.cameras.empty() && m.correspondences.empty()) fail(ErrorCode::kFormat, path.string() + ": needs correspondences or cameras");
  return m;
}

CameraSequence calibrate_stage(const SceneManifest& m, PipelineReport& rep) {
  const int n = static_cast<int>(m.frames.size());
  CameraSequence cameras(static_cast<std::size_t>(n));
  if (!m.cameras.empty()) {
    cameras = read_cameras(m.cameras, n);
    for (int k = 0; k < n; ++k) {
      if (!cameras[static_cast<std::size_t>(k)]) rep.errors.push_back({"calibrate", k, -1, "no camera supplied for this frame", true});
    }
  } else {
    std::vector<EdgeSet> edges;
    for (const FrameInputs& f : m.frames) edges.push_back(EdgeSet::from_mask(read_mask(f.edges)));
    const auto pairs = correspondences_from_json(read_json(m.correspondences));
    const auto points = sample_template_points(m.field, m.params.edge_spacing);
    const SequenceCalibration cal = calibrate_sequence(edges, pairs, points, m.params.refine);
    for (std::size_t k = 0; k < cal.cameras.size() && k < cameras.size(); ++k) cameras[k] = cal.cameras[k];
    if (cal.failure) rep.errors.push_back({"calibrate", static_cast<int>(cal.failure->frame), -1, cal.failure->message, true});
  }
  rep.calibrated_frames = static_cast<int>(std::count_if(cameras.begin(), cameras.end(), [](const auto& c) { return c.has_value(); }));
  return cameras;
}

std::vector<Track> track_stage(const SceneManifest& m, const CameraSequence& cameras, PipelineReport& rep) {
  std::vector<Detection> refined;
  for (std::size_t k = 0; k < m.frames.size(); ++k) {
    const FrameInputs& f = m.frames[k];
    std::vector<Detection> boxes = f.detections.empty() ? std::vector<Detection>{} : read_detections(f.detections);
    std::vector<Pose> poses = f.poses.empty() ? std::vector<Pose>{} : read_poses(f.poses);
    for (Detection& d : boxes) d.frame = static_cast<int>(k);
    for (Pose& p : poses) p.frame = static_cast<int>(k);
    const Camera* cam = k < cameras.size() && cameras[k] ? &*cameras[k] : nullptr;
    std::size_t dropped = 0;
    std::vector<Detection> out = refine_boxes(boxes, poses, m.image_size, cam, m.params.boxes, &dropped);
    // Frames without a camera cannot be lifted, so their detections are dropped.
    if (!cam) {
      dropped += out.size();
      out.clear();
    }
    rep.detections_in += out.size() + dropped;
    rep.detections_dropped += dropped;
    refined.insert(refined.end(), out.begin(), out.end());
  }
  std::vector<Track> tracks = merge_tracks(refined, m.params.merge);
  rep.tracks = tracks.size();
  for (const Track& t : tracks) rep.detections_tracked += t.detections.size();
  return tracks;
}

std::vector<SegmentRecord> segment_stage(const SceneManifest& m, const std::vector<Track>& tracks, PipelineReport& rep) {
  const std::vector<DetectionWork> work = work_items(tracks);
  std::vector<std::optional<SegmentRecord>> slots(work.size());
  std::vector<std::optional<StageError>> errors(work.size());
  for (const auto& [frame, idx] : by_frame(work)) {
    RgbImage image;
    Mask person;
    try {
      image = load_frame_image(m, frame);
      const fs::path& mask_path = m.frames.at(static_cast<std::size_t>(frame)).person_mask;
      if (!mask_path.empty()) {
        person = read_mask(mask_path);
        require_same_size(person, image, "person mask");
      }
    } catch (const Error& e) {
      rep.errors.push_back({"segment", frame, -1, e.what(), false});
      continue;
    }
    parallel_for(idx.size(), m.params.workers, [&](std::size_t local) {
      const std::size_t i = idx[local];
      std::vector<const Detection*> others;
      for (std::size_t o : idx) {
        if (o != i) others.push_back(work[o].detection);
      }
      try {
        slots[i] = segment_detection(image, person, work[i], others, m.params);
      } catch (const Error& e) {
        errors[i] = StageError{"segment", work[i].frame, work[i].track, e.what(), false};
      }
    });
  }
  std::vector<SegmentRecord> out;
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (errors[i]) rep.errors.push_back(*errors[i]);
    if (slots[i]) out.push_back(std::move(*slots[i]));
  }
  return out;
}

LiftResult lift_stage(const SceneManifest& m, const CameraSequence& cameras, const std::vector<Track>& tracks,
                      const std::vector<SegmentRecord>& segments, PipelineReport& rep) {
  const std::vector<DetectionWork> work = work_items(tracks);
  std::map<std::pair<int, int>, const SegmentRecord*> segment_of;
  for (const SegmentRecord& s : segments) segment_of[{s.frame, s.track}] = &s;
  std::vector<LiftItem> items(work.size());
  for (const auto& [frame, idx] : by_frame(work)) {
    const auto fi = static_cast<std::size_t>(frame);
    if (fi >= cameras.size() || !cameras[fi]) {
      rep.errors.push_back({"lift", frame, -1, "frame has no camera", false});
      continue;
    }
    RgbImage image;
    std::vector<ClassEntry> classes;
    try {
      image = load_frame_image(m, frame);
      classes = load_class_entries(m.frames.at(fi).depth_classes);
    } catch (const Error& e) {
      rep.errors.push_back({"lift", frame, -1, e.what(), false});
      continue;
    }
    parallel_for(idx.size(), m.params.workers, [&](std::size_t local) {
      const std::size_t i = idx[local];
      const auto it = segment_of.find({work[i].frame, work[i].track});
      items[i] = lift_detection(work[i], *cameras[fi], image, classes, it == segment_of.end() ? nullptr : it->second,
                                m.params);
    });
  }
  LiftResult out;
  out.meshes.resize(m.frames.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    LiftItem& item = items[i];
    rep.errors.insert(rep.errors.end(), item.errors.begin(), item.errors.end());
    if (item.record) out.players.push_back(*item.record);
    if (item.mesh) {
      out.textures[item.mesh->texture] = std::move(item.texture);
      ++rep.meshes;
      rep.mesh_vertices += item.mesh->vertices.size();
      out.meshes[static_cast<std::size_t>(work[i].frame)].push_back(std::move(*item.mesh));
    }
  }
  return out;
}

std::vector<std::vector<Vec3>> smooth_stage(const std::vector<Track>& tracks, const std::vector<PlayerRecord>& players,
                                            double smoothness, PipelineReport& rep) {
  std::vector<std::vector<Vec3>> out(tracks.size());
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    const Track& t = tracks[ti];
    if (t.detections.empty()) continue;
    const int first = t.detections.front().frame;
    TrajectoryProblem problem;
    problem.n_frames = t.detections.back().frame - first + 1;
    problem.smoothness = smoothness;
    for (const PlayerRecord& p : players) {
      if (p.track == t.id && p.frame >= first && p.frame - first < problem.n_frames) problem.observations[p.frame - first] = p.center;
    }
    try {
      out[ti] = smooth_trajectory(problem);
    } catch (const Error& e) {
      rep.errors.push_back({"smooth", first, t.id, e.what(), false});
    }
  }
  return out;
}

void write_cameras(const fs::path& path, const CameraSequence& cameras) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < cameras.size(); ++k) {
    rows.push_back({{"frame", k}, {"camera", cameras[k] ? nlohmann::json(*cameras[k]) : nlohmann::json(nullptr)}});
  }
  write_json(path, {{"cameras", rows}});
}

CameraSequence read_cameras(const fs::path& path, int n_frames) {
  const nlohmann::json j = read_json(path);
  CameraSequence cameras(static_cast<std::size_t>(n_frames));
  try {
    for (const auto& entry : j.at("cameras")) {
      const int f = entry.at("frame").get<int>();
      if (f < 0 || f >= n_frames) fail(ErrorCode::kFormat, path.string() + ": camera frame out of range");
      if (!entry.at("camera").is_null()) cameras[static_cast<std::size_t>(f)] = entry.at("camera").get<Camera>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  return cameras;
}

void write_tracks(const fs::path& path, const std::vector<Track>& tracks) { write_json(path, {{"tracks", tracks}}); }

std::vector<Track> read_tracks(const fs::path& path) {
  const nlohmann::json j = read_json(path);
  try {
    return j.at("tracks").get<std::vector<Track>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

void write_segments(const fs::path& dir, const std::vector<SegmentRecord>& segments) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SegmentRecord& s : segments) {
    const std::string file = "masks/" + detection_stem(s.frame, s.track) + ".png";
    fs::create_directories(dir / "masks");
    write_mask(dir / file, s.mask);
    rows.push_back({{"frame", s.frame}, {"track", s.track}, {"origin", {s.x0, s.y0}}, {"file", file}});
  }
  write_json(dir / "segments.json", {{"segments", rows}});
}

std::vector<SegmentRecord> read_segments(const fs::path& dir) {
  const fs::path path = dir / "segments.json";
  const nlohmann::json j = read_json(path);
  std::vector<SegmentRecord> out;
  try {
    for (const auto& row : j.at("segments")) {
      SegmentRecord s;
      s.frame = row.at("frame").get<int>();
      s.track = row.at("track").get<int>();
      s.x0 = row.at("origin")[0].get<int>();
      s.y0 = row.at("origin")[1].get<int>();
      s.mask = read_mask(dir / row.at("file").get<std::string>());
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  return out;
}

void write_lift(const fs::path& dir, const LiftResult& lift, const FieldTemplate& field) {
  nlohmann::json rows = nlohmann::json::array();
  for (const PlayerRecord& p : lift.players) {
    rows.push_back({{"frame", p.frame},
                    {"track", p.track},
                    {"ground", vec3_json(p.ground)},
                    {"center", vec3_json(p.center)},
                    {"bbox", {p.bbox.x, p.bbox.y, p.bbox.width, p.bbox.height}},
                    {"mesh", p.mesh},
                    {"vertices", p.vertices},
                    {"faces", p.faces}});
  }
  write_json(dir / "players.json", {{"players", rows}});
  for (const auto& [name, tex] : lift.textures) {
    fs::create_directories((dir / "meshes" / name).parent_path());
    write_png_rgb(dir / "meshes" / name, tex);
  }
  for (std::size_t k = 0; k < lift.meshes.size(); ++k) {
    if (lift.meshes[k].empty()) continue;
    export_obj(lift.meshes[k], field, dir / "meshes" / ("frame_" + frame_stem(static_cast<int>(k)) + ".obj"));
  }
}

std::vector<PlayerRecord> read_players(const fs::path& path) {
  const nlohmann::json j = read_json(path);
  std::vector<PlayerRecord> out;
  try {
    for (const auto& row : j.at("players")) {
      PlayerRecord p;
      p.frame = row.at("frame").get<int>();
      p.track = row.at("track").get<int>();
      p.ground = vec3_from(row.at("ground"));
      p.center = vec3_from(row.at("center"));
      const auto& b = row.at("bbox");
      p.bbox = PixelBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
      p.mesh = row.value("mesh", std::string());
      p.vertices = row.value("vertices", std::size_t{0});
      p.faces = row.value("faces", std::size_t{0});
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  return out;
}

void write_trajectories(const fs::path& dir, const std::vector<Track>& tracks, const std::vector<std::vector<Vec3>>& trajectories) {
  for (std::size_t ti = 0; ti < tracks.size() && ti < trajectories.size(); ++ti) {
    if (trajectories[ti].empty()) continue;
    nlohmann::json j = trajectory_to_json(trajectories[ti]);
    j["track"] = tracks[ti].id;
    j["first_frame"] = tracks[ti].detections.front().frame;
    char name[32];
    std::snprintf(name, sizeof name, "track_%03d.json", tracks[ti].id);
    write_json(dir / "trajectories" / name, j);
  }
}

ReconstructionBundle run_pipeline(const SceneManifest& m, const fs::path& out_dir) {
  ReconstructionBundle b;
  PipelineReport& rep = b.report;
  rep.frames = static_cast<int>(m.frames.size());
  Stopwatch clock(rep.timings);

  b.cameras = calibrate_stage(m, rep);
  write_cameras(out_dir / "cameras.json", b.cameras);
  clock.lap("calibrate");
  b.tracks = track_stage(m, b.cameras, rep);
  write_tracks(out_dir / "tracks.json", b.tracks);
  clock.lap("track");
  const std::vector<SegmentRecord> segments = segment_stage(m, b.tracks, rep);
  write_segments(out_dir, segments);
  clock.lap("segment");
  LiftResult lift = lift_stage(m, b.cameras, b.tracks, segments, rep);
  write_lift(out_dir, lift, m.field);
  clock.lap("lift");
  b.trajectories = smooth_stage(b.tracks, lift.players, m.params.smoothness, rep);
  write_trajectories(out_dir, b.tracks, b.trajectories);
  clock.lap("smooth");
  b.players = std::move(lift.players);
  b.meshes = std::move(lift.meshes);

  write_json(out_dir / "report.json", report_to_json(rep));
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& t : rep.timings) timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  write_json(out_dir / "timings.json", {{"timings", timings}});
  return b;
}

fs::path write_synth_dataset(const SynthDatasetOptions& options, const fs::path& out) {
  SequenceOptions seq;
  seq.frames = options.frames;
  seq.pan_degrees = options.pan_degrees;
  seq.max_speed = options.max_speed;
  seq.scene.image_size = options.image_size;
  seq.scene.players = options.players;
  std::vector<SynthScene> scenes = make_broadcast_sequence(options.seed, seq);

  nlohmann::json frames = nlohmann::json::array();
  nlohmann::json truth_frames = nlohmann::json::array();
  for (int k = 0; k < options.frames; ++k) {
    SynthScene& scene = scenes[static_cast<std::size_t>(k)];
    scene.noise.pixel_jitter = options.edge_jitter;
    scene.noise.edge_dropout = options.edge_dropout;
    const std::string stem = frame_stem(k);
    const NdcRender render = render_ndc(scene);
    fs::create_directories(out / "frames");
    write_png_rgb(out / "frames" / (stem + ".png"), render.capture.color);
    write_mask(out / "edges" / (stem + ".png"), render_edges(scene).to_mask());
    Mask person(render.labels.size(), 0);
    for (std::size_t i = 0; i < person.storage().size(); ++i) person.storage()[i] = render.labels.storage()[i] == kLabelPlayer;
    write_mask(out / "masks" / (stem + ".png"), person);

    std::vector<nlohmann::json> boxes, poses;
    nlohmann::json class_maps = nlohmann::json::array();
    nlohmann::json players = nlohmann::json::array();
    for (std::size_t i = 0; i < scene.players.size(); ++i) {
      const PlayerPrimitive& p = scene.players[i];
      Detection box;
      box.frame = k;
      box.bbox = projected_bbox(scene.camera, p);
      Pose pose{k, synth_keypoints(scene.camera, p)};
      boxes.push_back(box);
      poses.push_back(pose);
      players.push_back({{"ground", vec3_json(p.ground)}, {"width", p.width}, {"height", p.height}, {"depth", p.depth}});

      const std::vector<Detection> refined = refine_boxes(std::span(&box, 1), std::span(&pose, 1), scene.camera.image_size, &scene.camera);
      if (refined.empty()) continue;
      const Detection& d = refined.front();
      const ImageSize raster{options.class_raster, options.class_raster};
      CropFrame crop{Vec2(d.bbox.x, d.bbox.y), Vec2(d.bbox.width / raster.width, d.bbox.height / raster.height)};
      const Billboard board = lift_billboard_at(scene.camera, ground_contact(d));
      const ClassMap cm = render_class_map(scene, static_cast<int>(i), board, crop, raster);
      const std::string file = stem + "_" + std::to_string(i) + ".png";
      fs::create_directories(out / "classes");
      write_png_gray(out / "classes" / file, cm);
      class_maps.push_back({{"file", file},
                            {"origin", {crop.origin.x(), crop.origin.y()}},
                            {"scale", {crop.scale.x(), crop.scale.y()}},
                            {"size", {raster.width, raster.height}}});
    }
    write_json_lines(out / "detections" / (stem + ".jsonl"), boxes);
    write_json_lines(out / "poses" / (stem + ".jsonl"), poses);
    write_json(out / "classes" / (stem + ".json"), {{"class_maps", class_maps}});
    frames.push_back({{"image", "frames/" + stem + ".png"},
                      {"edges", "edges/" + stem + ".png"},
                      {"detections", "detections/" + stem + ".jsonl"},
                      {"poses", "poses/" + stem + ".jsonl"},
                      {"person_mask", "masks/" + stem + ".png"},
                      {"depth_classes", "classes/" + stem + ".json"}});
    truth_frames.push_back({{"frame", k}, {"camera", scene.camera}, {"glcam", scene.glcam()}, {"players", players}});

    if (k == 0) {
      write_ndc_pfm(out / "captures" / (stem + "_depth.pfm"), render.capture.ndc_depth);
      write_png_gray(out / "captures" / (stem + "_labels.png"), render.labels);
      write_json(out / "captures" / (stem + "_glcam.json"), render.capture.glcam);
      write_json(out / "captures" / (stem + "_aux_camera.json"), scene.camera);
    }
  }

  // Frame-0 landmarks: template line endpoints that land inside the image.
  std::vector<Correspondence> pairs;
  const Camera& cam0 = scenes.front().camera;
  for (const LineSegment& l : scenes.front().field.lines) {
    for (const Vec3& w : {l.a, l.b}) {
      if (cam0.to_camera(w).z() <= 1e-6) continue;
      const Vec2 uv = project(cam0, w);
      if (uv.x() < 0 || uv.y() < 0 || uv.x() >= cam0.image_size.width || uv.y() >= cam0.image_size.height) continue;
      const bool seen = std::any_of(pairs.begin(), pairs.end(), [&](const Correspondence& c) { return (c.world - w).norm() < 1e-9; });
      if (!seen) pairs.push_back({w, uv});
    }
  }
  write_json(out / "correspondences.json", correspondences_to_json(pairs));
  write_json(out / "truth.json", {{"seed", options.seed}, {"frames", truth_frames}});
  const fs::path manifest = out / "manifest.json";
  write_json(manifest, {{"image_size", {options.image_size.width, options.image_size.height}},
                        {"correspondences", "correspondences.json"},
                        {"frames", frames}});
  return manifest;
}

}  // namespace soccer3d

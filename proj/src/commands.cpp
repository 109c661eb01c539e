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


#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "soccer3d/dataset_extract.hpp"
#include "soccer3d/formats.hpp"
#include "soccer3d/gamecam.hpp"
#include "soccer3d/metrics.hpp"
#include "soccer3d/pipeline.hpp"
#include "soccer3d/segmentation.hpp"
#include "soccer3d/trajectory.hpp"

namespace soccer3d {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Typed access to a command's option object that remembers which keys were
// read, so leftovers can be reported as unknown.
class Options {
 public:
  Options(const json& j, std::string_view command) : j_(j), command_(command) {
    if (!j_.is_object()) fail(ErrorCode::kInvalidArgument, command_ + ": options must be a JSON object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  T need(const std::string& key) {
    if (!has(key)) fail(ErrorCode::kInvalidArgument, command_ + ": missing option '" + key + "'");
    return convert<T>(key);
  }

  fs::path path(const std::string& key) { return need<std::string>(key); }
  fs::path path(const std::string& key, const fs::path& fallback) {
    return has(key) ? fs::path(convert<std::string>(key)) : fallback;
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) fail(ErrorCode::kInvalidArgument, command_ + ": unknown option '" + key + "'");
    }
  }

 private:
  template <typename T>
  T convert(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::kInvalidArgument, command_ + ": option '" + key + "': " + e.what());
    }
  }

  const json& j_;
  std::string command_;
  std::set<std::string> used_;
};

// Manifest plus "params" overrides, shared by the pipeline-stage commands.
// Parameters may come as a "params" object, as top-level keys, or both; the
// top-level keys win.
SceneManifest manifest_from(Options& o) {
  SceneManifest m = load_manifest(o.path("manifest"));
  json overrides = o.has("params") ? o.raw("params") : json::object();
  for (const std::string& name : pipeline_param_names()) {
    if (o.has(name)) overrides[name] = o.raw(name);
  }
  apply_params(overrides, m.params);
  return m;
}

json with_report(json result, const PipelineReport& report) {
  result["report"] = report_to_json(report);
  result["ok"] = report.ok();
  return result;
}

json cmd_synth(Options& o) {
  SynthDatasetOptions s;
  s.seed = o.get<std::uint64_t>("seed", s.seed);
  s.frames = o.get("frames", s.frames);
  s.players = o.get("players", s.players);
  s.image_size.width = o.get("width", s.image_size.width);
  s.image_size.height = o.get("height", s.image_size.height);
  s.pan_degrees = o.get("pan_degrees", s.pan_degrees);
  s.max_speed = o.get("max_speed", s.max_speed);
  s.edge_jitter = o.get("jitter", s.edge_jitter);
  s.edge_dropout = o.get("dropout", s.edge_dropout);
  s.class_raster = o.get("class_raster", s.class_raster);
  const fs::path out = o.path("out");
  o.finish();
  if (s.frames < 1 || s.players < 0 || s.class_raster < 2) fail(ErrorCode::kInvalidArgument, "synth: frames >= 1, players >= 0, class_raster >= 2");
  return {{"manifest", write_synth_dataset(s, out).string()}, {"ok", true}};
}

json cmd_calibrate_game(Options& o) {
  const Grid<double> depth = read_ndc_pfm(o.path("depth"));
  const Grid<std::uint8_t> labels = read_png_gray(o.path("labels"));
  const Camera aux = read_json(o.path("aux_camera")).get<Camera>();
  GameCamOptions opts;
  opts.lambda = o.get("lambda", opts.lambda);
  opts.max_iterations = o.get("max_iterations", opts.max_iterations);
  const fs::path out = o.path("out");
  GameCamParams init = GameCamParams::from_aux(aux);
  init.z_near = o.get("z_near", init.z_near);
  init.z_far = o.get("z_far", init.z_far);
  o.finish();
  const GameCamResult r = recover_game_camera(NdcCapture::from_labels(depth, labels), aux, init, opts);
  write_json(out, r.glcam);
  return {{"glcam", out.string()},
          {"initial_objective", r.initial_objective},
          {"final_objective", r.final_objective},
          {"ground_term", r.ground_term},
          {"player_term", r.player_term},
          {"iterations", r.iterations},
          {"dropped_targets", r.dropped_targets},
          {"ok", true}};
}

json cmd_calibrate(Options& o) {
  if (o.has("depth")) return cmd_calibrate_game(o);
  SceneManifest m = manifest_from(o);
  const fs::path out = o.path("out");
  o.finish();
  m.cameras.clear();
  PipelineReport report;
  report.frames = static_cast<int>(m.frames.size());
  const CameraSequence cameras = calibrate_stage(m, report);
  write_cameras(out / "cameras.json", cameras);
  return with_report({{"cameras", (out / "cameras.json").string()}}, report);
}

json cmd_track(Options& o) {
  SceneManifest m = manifest_from(o);
  const fs::path out = o.path("out");
  m.cameras = o.path("cameras", out / "cameras.json");
  o.finish();
  PipelineReport report;
  report.frames = static_cast<int>(m.frames.size());
  const CameraSequence cameras = read_cameras(m.cameras, report.frames);
  const std::vector<Track> tracks = track_stage(m, cameras, report);
  write_tracks(out / "tracks.json", tracks);
  return with_report({{"tracks", (out / "tracks.json").string()}}, report);
}

// Single crop: image plus anchor label PNG to a 0/255 mask.
json cmd_segment_crop(Options& o) {
  const RgbImage image = read_png_rgb(o.path("image"));
  const AnchorMap anchors = read_png_gray(o.path("anchors"));
  const double tau = o.get("tau", 0.5);
  const fs::path out = o.path("out");
  const std::optional<fs::path> values = o.has("values") ? std::optional(o.path("values")) : std::nullopt;
  const std::optional<fs::path> cnn = o.has("person_mask") ? std::optional(o.path("person_mask")) : std::nullopt;
  o.finish();
  require_same_size(anchors, image, "anchors");
  for (std::uint8_t a : anchors.storage()) {
    if (a != kAnchorPlayer && a != kAnchorBackground && a != kAnchorOther && a != kAnchorFree) {
      fail(ErrorCode::kFormat, "anchor labels must be 0, 1, 2 or 255");
    }
  }
  const AssociationField field = solve_association(build_affinity(image, edge_strength(image)), anchors);
  Mask mask = threshold_mask(field.values, tau);
  if (cnn) {
    const Mask m_cnn = read_mask(*cnn);
    require_same_size(m_cnn, image, "person mask");
    mask = combine_masks(mask, m_cnn);
  }
  write_mask(out, mask);
  if (values) {
    Grid<float> v(field.values.size());
    for (std::size_t i = 0; i < v.storage().size(); ++i) v.storage()[i] = static_cast<float>(field.values.storage()[i]);
    write_pfm(*values, v);
  }
  return {{"mask", out.string()}, {"sweeps", field.sweeps}, {"residual", field.residual}, {"ok", true}};
}

json cmd_segment(Options& o) {
  if (o.has("anchors")) return cmd_segment_crop(o);
  const SceneManifest m = manifest_from(o);
  const fs::path out = o.path("out");
  const fs::path tracks_path = o.path("tracks", out / "tracks.json");
  o.finish();
  PipelineReport report;
  report.frames = static_cast<int>(m.frames.size());
  const std::vector<SegmentRecord> segments = segment_stage(m, read_tracks(tracks_path), report);
  write_segments(out, segments);
  return with_report({{"segments", (out / "segments.json").string()}, {"count", segments.size()}}, report);
}

json cmd_lift(Options& o) {
  const SceneManifest m = manifest_from(o);
  const fs::path out = o.path("out");
  const fs::path cameras_path = o.path("cameras", out / "cameras.json");
  const fs::path tracks_path = o.path("tracks", out / "tracks.json");
  const fs::path segments_dir = o.path("segments", out);
  o.finish();
  PipelineReport report;
  report.frames = static_cast<int>(m.frames.size());
  const CameraSequence cameras = read_cameras(cameras_path, report.frames);
  const LiftResult lift = lift_stage(m, cameras, read_tracks(tracks_path), read_segments(segments_dir), report);
  write_lift(out, lift, m.field);
  return with_report({{"players", (out / "players.json").string()}, {"meshes", report.meshes}}, report);
}

json cmd_smooth(Options& o) {
  if (o.has("problem")) {
    TrajectoryProblem problem = read_json(o.path("problem")).get<TrajectoryProblem>();
    if (o.has("smoothness")) problem.smoothness = o.get("smoothness", problem.smoothness);
    const fs::path out = o.path("out");
    o.finish();
    const auto trajectory = smooth_trajectory(problem);
    write_json(out, trajectory_to_json(trajectory));
    return {{"trajectory", out.string()}, {"n_frames", trajectory.size()}, {"ok", true}};
  }
  const fs::path out = o.path("out");
  const fs::path tracks_path = o.path("tracks", out / "tracks.json");
  const fs::path players_path = o.path("players", out / "players.json");
  const double smoothness = o.get("smoothness", PipelineParams{}.smoothness);
  o.finish();
  PipelineReport report;
  const std::vector<Track> tracks = read_tracks(tracks_path);
  write_trajectories(out, tracks, smooth_stage(tracks, read_players(players_path), smoothness, report));
  return with_report({{"trajectories", (out / "trajectories").string()}}, report);
}

json cmd_extract(Options& o) {
  Capture capture;
  const fs::path depth_path = o.path("depth");
  capture.ndc_depth = read_ndc_pfm(depth_path);
  capture.glcam = read_json(o.path("glcam")).get<GlCamera>();
  capture.color = o.has("image") ? read_png_rgb(o.path("image")) : RgbImage(capture.ndc_depth.size());
  FieldBounds bounds;
  bounds.half_length = o.get("half_length", bounds.half_length);
  bounds.half_width = o.get("half_width", bounds.half_width);
  bounds.ground_eps = o.get("ground_eps", bounds.ground_eps);
  const double eps = o.get("eps", 0.5);
  const int min_pts = o.get("min_pts", 20);
  CropOptions crop;
  crop.margin = o.get("margin", crop.margin);
  const fs::path out = o.path("out");
  std::string stem = depth_path.stem().string();
  if (stem.size() > 6 && stem.ends_with("_depth")) stem.resize(stem.size() - 6);
  stem = o.get("stem", stem);
  o.finish();
  require_same_size(capture.color, capture.ndc_depth, "capture color");
  if (eps <= 0.0 || min_pts < 1 || crop.margin < 0) fail(ErrorCode::kInvalidArgument, "extract: eps > 0, min_pts >= 1, margin >= 0");

  const PointCloud cloud = extract_point_cloud(capture, crop.convention);
  const std::vector<CloudPoint> players = filter_players(cloud.points, bounds);
  std::vector<Vec3> xyz;
  xyz.reserve(players.size());
  for (const CloudPoint& p : players) xyz.push_back(p.world);
  const std::vector<int> labels = dbscan(xyz, eps, min_pts);
  std::size_t skipped = 0;
  const std::vector<CropPair> pairs = emit_crop_pairs(capture, players, labels, crop, &skipped);
  fs::create_directories(out);
  json crops = json::array();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const CropPair& c = pairs[k];
    const std::string img = stem + "_img_" + std::to_string(k) + ".png";
    const std::string dep = stem + "_depth_" + std::to_string(k) + ".pfm";
    write_png_rgb(out / img, c.image);
    write_depth_pfm(out / dep, c.depth);
    crops.push_back({{"index", k},
                     {"cluster", c.cluster},
                     {"cluster_size", c.cluster_size},
                     {"bbox", {c.x0, c.y0, c.image.width(), c.image.height()}},
                     {"image", img},
                     {"depth", dep}});
  }
  const int clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  const json summary = {{"points", cloud.points.size()}, {"dropped", cloud.dropped}, {"player_points", players.size()},
                        {"clusters", clusters},          {"skipped", skipped},       {"crops", crops}};
  write_json(out / (stem + "_crops.json"), summary);
  json result = summary;
  result["ok"] = true;
  return result;
}

std::map<std::string, fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) fail(ErrorCode::kIo, dir.string() + ": not a directory");
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out[entry.path().stem().string()] = entry.path();
  }
  return out;
}

json cmd_eval(Options& o) {
  const fs::path pred_dir = o.path("pred");
  const fs::path gt_dir = o.path("gt");
  const std::string kind = o.get<std::string>("kind", "depth");
  const std::optional<fs::path> mask_dir = o.has("masks") ? std::optional(o.path("masks")) : std::nullopt;
  const fs::path out = o.path("out");
  o.finish();
  if (kind != "depth" && kind != "mask") fail(ErrorCode::kInvalidArgument, "eval: kind must be 'depth' or 'mask'");
  const std::string ext = kind == "depth" ? ".pfm" : ".png";
  const auto preds = files_with_extension(pred_dir, ext);
  const auto gts = files_with_extension(gt_dir, ext);
  for (const auto& [name, path] : preds) {
    if (!gts.count(name)) fail(ErrorCode::kFormat, "eval: no ground truth for " + path.string());
  }
  if (preds.empty()) fail(ErrorCode::kEmptyEvaluation, "eval: no " + ext + " files in " + pred_dir.string());
  const std::string metric = kind == "depth" ? "st_rmse" : "iou";
  json rows = json::array();
  double sum = 0.0;
  std::string csv = "file," + metric + "\n";
  char buf[64];
  for (const auto& [name, path] : preds) {
    double value = 0.0;
    if (kind == "depth") {
      const DepthMap pred = read_depth_pfm(path);
      const DepthMap gt = read_depth_pfm(gts.at(name));
      if (mask_dir) {
        const Mask mask = read_mask(*mask_dir / (name + ".png"));
        value = st_rmse(pred, gt, &mask);
      } else {
        value = st_rmse(pred, gt);
      }
    } else {
      value = iou(read_mask(path), read_mask(gts.at(name)));
    }
    sum += value;
    rows.push_back({{"file", name}, {metric, value}});
    std::snprintf(buf, sizeof buf, "%.9g", value);
    csv += name + "," + buf + "\n";
  }
  const double mean = sum / static_cast<double>(preds.size());
  std::snprintf(buf, sizeof buf, "%.9g", mean);
  csv += std::string("mean,") + buf + "\n";
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream f(out);
  f << csv;
  if (!f) fail(ErrorCode::kIo, "failed writing " + out.string());
  return {{"csv", out.string()}, {"pairs", preds.size()}, {"metric", metric}, {"mean", mean}, {"rows", rows}, {"ok", true}};
}

// Merges player objects from existing OBJ files into one scene with a single
// field quad. Texture paths are rewritten relative to the output.
json cmd_export(Options& o) {
  const auto inputs = o.need<std::vector<std::string>>("inputs");
  const fs::path out = o.path("out");
  const bool with_field = o.get("field", true);
  FieldTemplate field = FieldTemplate::standard();
  if (o.has("field_template")) field = read_json(o.path("field_template")).get<FieldTemplate>();
  o.finish();
  ObjScene scene = make_obj_scene({}, with_field ? &field : nullptr);
  std::set<std::string> names;
  for (const auto& o2 : scene.objects) names.insert(o2.name);
  const fs::path out_dir = fs::absolute(out).parent_path();
  for (const std::string& input : inputs) {
    const fs::path in = input;
    ObjScene part = read_obj(in);
    for (ObjObject& obj : part.objects) {
      if (obj.name == "field") continue;
      if (!names.insert(obj.name).second) fail(ErrorCode::kFormat, "export: duplicate object name " + obj.name);
      if (!obj.texture.empty()) {
        obj.texture = fs::relative(fs::absolute(in).parent_path() / obj.texture, out_dir).generic_string();
      }
      scene.objects.push_back(std::move(obj));
    }
  }
  write_obj(out, scene);
  return {{"obj", out.string()}, {"objects", scene.objects.size()}, {"vertices", scene.vertex_count()}, {"ok", true}};
}

json cmd_run(Options& o) {
  const SceneManifest m = manifest_from(o);
  const fs::path out = o.path("out");
  o.finish();
  const ReconstructionBundle b = run_pipeline(m, out);
  return with_report({{"out", out.string()}}, b.report);
}

using Handler = std::function<json(Options&)>;

const std::map<std::string, Handler, std::less<>>& handlers() {
  static const std::map<std::string, Handler, std::less<>> table = {
      {"synth", cmd_synth},   {"calibrate", cmd_calibrate}, {"track", cmd_track}, {"segment", cmd_segment},
      {"lift", cmd_lift},     {"smooth", cmd_smooth},       {"extract", cmd_extract}, {"eval", cmd_eval},
      {"export", cmd_export}, {"run", cmd_run}};
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"synth", "calibrate", "track", "segment", "lift",
                                                 "smooth", "extract", "eval", "export", "run"};
  return names;
}

json run_command(std::string_view name, const json& options) {
  const auto it = handlers().find(name);
  if (it == handlers().end()) fail(ErrorCode::kInvalidArgument, "unknown command '" + std::string(name) + "'");
  Options o(options, name);
  return it->second(o);
}

}  // namespace soccer3d

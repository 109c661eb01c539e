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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soccer3d/depthmesh.hpp"
#include "soccer3d/field_calibration.hpp"
#include "soccer3d/image_io.hpp"
#include "soccer3d/tracking.hpp"

namespace soccer3d {

struct FrameInputs {
  std::filesystem::path image;         // RGB PNG
  std::filesystem::path edges;         // edge mask PNG
  std::filesystem::path detections;    // JSON lines of boxes
  std::filesystem::path poses;         // JSON lines of poses
  std::filesystem::path person_mask;   // M_CNN PNG, optional
  std::filesystem::path depth_classes;  // JSON list of class maps with placements, optional
};

struct PipelineParams {
  double edge_spacing = 0.5;  // template sampling for calibration, meters
  RefineOptions refine;
  RefineBoxOptions boxes;
  MergeOptions merge;
  double tau = 0.5;
  double anchor_radius = 1.5;
  MeshOptions mesh;
  double smoothness = 1.0;
  double class_match_iou = 0.5;
  int workers = 1;
};

struct SceneManifest {
  ImageSize image_size;
  std::vector<FrameInputs> frames;
  std::filesystem::path correspondences;  // frame-0 landmarks, required unless cameras is set
  std::filesystem::path cameras;          // precomputed cameras; skips calibration
  FieldTemplate field = FieldTemplate::standard();
  PipelineParams params;
};

// Relative paths resolve against the manifest's directory. Unknown keys in
// "params" are rejected.
SceneManifest load_manifest(const std::filesystem::path& path);

struct StageError {
  std::string stage;
  int frame = -1;
  int detection = -1;
  std::string message;
  bool fatal = false;
};

struct PlayerRecord {
  int frame = 0;
  int track = 0;
  Vec3 ground = Vec3::Zero();  // billboard ground point
  Vec3 center = Vec3::Zero();  // lifted box center
  PixelBox bbox;
  std::string mesh;  // object name in the frame OBJ, empty when not meshed
  std::size_t vertices = 0;
  std::size_t faces = 0;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineReport {
  int frames = 0;
  int calibrated_frames = 0;
  std::size_t detections_in = 0;  // refinement candidates: poses plus unclaimed boxes
  std::size_t detections_dropped = 0;
  std::size_t detections_tracked = 0;
  std::size_t tracks = 0;
  std::size_t meshes = 0;
  std::size_t mesh_vertices = 0;
  std::vector<StageError> errors;
  std::vector<StageTiming> timings;

  bool ok() const;
};

using CameraSequence = std::vector<std::optional<Camera>>;

// M_final for one tracked detection over its integer crop box.
struct SegmentRecord {
  int frame = 0;
  int track = 0;
  int x0 = 0;
  int y0 = 0;
  Mask mask;
};

struct LiftResult {
  std::vector<PlayerRecord> players;
  std::vector<std::vector<PlayerMesh>> meshes;  // per frame
  std::map<std::string, RgbImage> textures;     // keyed by PlayerMesh::texture
};

// Overrides `params` from a flat object using the manifest parameter names;
// unknown keys are rejected.
void apply_params(const nlohmann::json& overrides, PipelineParams& params);
const std::vector<std::string>& pipeline_param_names();

// Stages run in this order by run_pipeline. Each appends its errors and counts
// to `report`; per-detection failures are recorded and skipped.
CameraSequence calibrate_stage(const SceneManifest& manifest, PipelineReport& report);
std::vector<Track> track_stage(const SceneManifest& manifest, const CameraSequence& cameras, PipelineReport& report);
std::vector<SegmentRecord> segment_stage(const SceneManifest& manifest, const std::vector<Track>& tracks,
                                         PipelineReport& report);
LiftResult lift_stage(const SceneManifest& manifest, const CameraSequence& cameras, const std::vector<Track>& tracks,
                      const std::vector<SegmentRecord>& segments, PipelineReport& report);
// One trajectory per track over lifted box centers, from the track's first frame.
std::vector<std::vector<Vec3>> smooth_stage(const std::vector<Track>& tracks, const std::vector<PlayerRecord>& players,
                                            double smoothness, PipelineReport& report);

// Stage checkpoints, so each stage can be re-run from files.
void write_cameras(const std::filesystem::path& path, const CameraSequence& cameras);
CameraSequence read_cameras(const std::filesystem::path& path, int n_frames);
void write_tracks(const std::filesystem::path& path, const std::vector<Track>& tracks);
std::vector<Track> read_tracks(const std::filesystem::path& path);
// segments.json plus masks/ under `dir`.
void write_segments(const std::filesystem::path& dir, const std::vector<SegmentRecord>& segments);
std::vector<SegmentRecord> read_segments(const std::filesystem::path& dir);
// players.json plus meshes/ (per-frame OBJ, MTL and textures) under `dir`.
void write_lift(const std::filesystem::path& dir, const LiftResult& lift, const FieldTemplate& field);
std::vector<PlayerRecord> read_players(const std::filesystem::path& path);
// trajectories/track_XXX.json under `dir`.
void write_trajectories(const std::filesystem::path& dir, const std::vector<Track>& tracks,
                        const std::vector<std::vector<Vec3>>& trajectories);

struct ReconstructionBundle {
  CameraSequence cameras;
  std::vector<Track> tracks;
  std::vector<PlayerRecord> players;
  std::vector<std::vector<PlayerMesh>> meshes;  // per frame
  std::vector<std::vector<Vec3>> trajectories;  // per track, from its first frame
  PipelineReport report;
};

// calibrate -> refine boxes -> merge tracks -> segment -> lift -> decode ->
// mesh -> smooth. Writes every stage checkpoint plus report.json and
// timings.json under `out_dir`.
ReconstructionBundle run_pipeline(const SceneManifest& manifest, const std::filesystem::path& out_dir);

nlohmann::json report_to_json(const PipelineReport& report);

struct SynthDatasetOptions {
  std::uint64_t seed = 1;
  int frames = 10;
  int players = 5;
  ImageSize image_size{960, 540};
  double pan_degrees = 0.1;
  double max_speed = 0.1;
  double edge_jitter = 0.0;
  double edge_dropout = 0.0;
  int class_raster = 64;
};

// Renders a seeded sequence into the directory layout run_pipeline reads
// (manifest.json plus per-frame files) and a truth.json with the exact
// cameras and player primitives.
std::filesystem::path write_synth_dataset(const SynthDatasetOptions& options, const std::filesystem::path& out_dir);

}  // namespace soccer3d

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
#include <span>
#include <string>
#include <vector>

#include "soccer3d/depthmesh.hpp"
#include "soccer3d/field_calibration.hpp"
#include "soccer3d/tracking.hpp"

namespace soccer3d {

nlohmann::json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline; parent directories are created.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// One JSON object per non-blank line.
std::vector<nlohmann::json> read_json_lines(const std::filesystem::path& path);
void write_json_lines(const std::filesystem::path& path, std::span<const nlohmann::json> rows);

std::vector<Detection> read_detections(const std::filesystem::path& path);
std::vector<Pose> read_poses(const std::filesystem::path& path);

// Metric depth as PFM; invalid pixels are stored as 0.
DepthMap read_depth_pfm(const std::filesystem::path& path);
void write_depth_pfm(const std::filesystem::path& path, const DepthMap& depth);
// Buffer depth in [0, 1] as PFM (float32).
Grid<double> read_ndc_pfm(const std::filesystem::path& path);
void write_ndc_pfm(const std::filesystem::path& path, const Grid<double>& depth);

// Class maps are 8-bit PNGs holding values 0..49.
ClassMap read_class_map(const std::filesystem::path& path);
// Masks as PNG: nonzero reads as set; written as 0/255.
Mask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);

// A named mesh inside an OBJ scene. Field quads and player meshes share this.
struct ObjObject {
  std::string name;
  std::string material;
  std::string texture;  // map_Kd path relative to the OBJ, may be empty
  std::vector<Vec3> vertices;
  std::vector<Vec2> uvs;  // one per vertex, OBJ convention (v up)
  std::vector<std::array<int, 3>> faces;  // indices into this object's vertices
};

struct ObjScene {
  std::string mtllib;
  std::vector<ObjObject> objects;
  std::size_t vertex_count() const;
};

// Player meshes become objects textured by their crop image; the field is a
// flat quad over the template's outer lines.
ObjScene make_obj_scene(std::span<const PlayerMesh> meshes, const FieldTemplate* field);
// Writes `<path>` and `<path stem>.mtl` next to it.
void write_obj(const std::filesystem::path& path, const ObjScene& scene);
ObjScene read_obj(const std::filesystem::path& path);

void export_obj(std::span<const PlayerMesh> meshes, const FieldTemplate& field, const std::filesystem::path& path);

}  // namespace soccer3d

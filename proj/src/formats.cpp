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


#include "soccer3d/formats.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "soccer3d/image_io.hpp"

namespace soccer3d {
namespace fs = std::filesystem;

namespace {

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorCode::kIo, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::kIo, "failed writing " + path.string());
}

std::vector<nlohmann::json> read_json_lines(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<nlohmann::json> rows;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return rows;
}

void write_json_lines(const fs::path& path, std::span<const nlohmann::json> rows) {
  std::ofstream out = open_out(path);
  for (const auto& row : rows) out << row.dump() << '\n';
  if (!out) fail(ErrorCode::kIo, "failed writing " + path.string());
}

std::vector<Detection> read_detections(const fs::path& path) {
  std::vector<Detection> out;
  for (const auto& row : read_json_lines(path)) out.push_back(row.get<Detection>());
  return out;
}

std::vector<Pose> read_poses(const fs::path& path) {
  std::vector<Pose> out;
  for (const auto& row : read_json_lines(path)) out.push_back(row.get<Pose>());
  return out;
}

DepthMap read_depth_pfm(const fs::path& path) {
  const Grid<float> raw = read_pfm(path);
  DepthMap d(raw.size());
  for (int y = 0; y < raw.height(); ++y) {
    for (int x = 0; x < raw.width(); ++x) {
      const double v = raw(x, y);
      if (v > 0.0 && std::isfinite(v)) d.set(x, y, v);
    }
  }
  return d;
}

void write_depth_pfm(const fs::path& path, const DepthMap& depth) {
  Grid<float> raw(depth.size(), 0.0f);
  for (int y = 0; y < raw.height(); ++y) {
    for (int x = 0; x < raw.width(); ++x) {
      if (depth.is_valid(x, y)) raw(x, y) = static_cast<float>(depth.depth(x, y));
    }
  }
  ensure_parent(path);
  write_pfm(path, raw);
}

Grid<double> read_ndc_pfm(const fs::path& path) {
  const Grid<float> raw = read_pfm(path);
  Grid<double> d(raw.size());
  for (std::size_t i = 0; i < raw.storage().size(); ++i) d.storage()[i] = raw.storage()[i];
  return d;
}

void write_ndc_pfm(const fs::path& path, const Grid<double>& depth) {
  Grid<float> raw(depth.size());
  for (std::size_t i = 0; i < raw.storage().size(); ++i) raw.storage()[i] = static_cast<float>(depth.storage()[i]);
  ensure_parent(path);
  write_pfm(path, raw);
}

ClassMap read_class_map(const fs::path& path) {
  ClassMap m = read_png_gray(path);
  for (std::uint8_t v : m.storage()) {
    if (v > kBackgroundClass) fail(ErrorCode::kFormat, path.string() + ": class value " + std::to_string(v) + " above 49");
  }
  return m;
}

Mask read_mask(const fs::path& path) {
  Mask m = read_png_gray(path);
  for (std::uint8_t& v : m.storage()) v = v ? 1 : 0;
  return m;
}

void write_mask(const fs::path& path, const Mask& mask) {
  Mask out(mask.size());
  for (std::size_t i = 0; i < out.storage().size(); ++i) out.storage()[i] = mask.storage()[i] ? 255 : 0;
  ensure_parent(path);
  write_png_gray(path, out);
}

std::size_t ObjScene::vertex_count() const {
  std::size_t n = 0;
  for (const auto& o : objects) n += o.vertices.size();
  return n;
}

ObjScene make_obj_scene(std::span<const PlayerMesh> meshes, const FieldTemplate* field) {
  ObjScene scene;
  if (field) {
    ObjObject quad;
    quad.name = "field";
    quad.material = "field";
    const double hl = field->length / 2.0;
    const double hw = field->width / 2.0;
    quad.vertices = {Vec3(-hl, 0, -hw), Vec3(hl, 0, -hw), Vec3(hl, 0, hw), Vec3(-hl, 0, hw)};
    quad.uvs = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    // Counter-clockwise seen from above (+y).
    quad.faces = {{0, 2, 1}, {0, 3, 2}};
    scene.objects.push_back(std::move(quad));
  }
  for (const PlayerMesh& m : meshes) {
    ObjObject o;
    o.name = m.name;
    o.material = "mat_" + m.name;
    o.texture = m.texture;
    o.vertices = m.vertices;
    for (const Vec2& uv : m.uvs) o.uvs.emplace_back(uv.x(), 1.0 - uv.y());
    o.faces = m.faces;
    scene.objects.push_back(std::move(o));
  }
  return scene;
}

void write_obj(const fs::path& path, const ObjScene& scene) {
  fs::path mtl = path;
  mtl.replace_extension(".mtl");
  {
    std::ofstream out = open_out(mtl);
    out << "# soccer3d materials\n";
    for (const auto& o : scene.objects) {
      out << "newmtl " << o.material << '\n';
      if (o.name == "field" && o.texture.empty()) {
        out << "Kd 0.2 0.55 0.2\n";
      } else {
        out << "Kd 1 1 1\n";
      }
      if (!o.texture.empty()) out << "map_Kd " << o.texture << '\n';
      out << '\n';
    }
    if (!out) fail(ErrorCode::kIo, "failed writing " + mtl.string());
  }
  std::ofstream out = open_out(path);
  out << "# soccer3d scene\n";
  out << "mtllib " << mtl.filename().string() << '\n';
  std::size_t base = 1;
  for (const auto& o : scene.objects) {
    if (o.uvs.size() != o.vertices.size()) fail(ErrorCode::kInvalidArgument, "object " + o.name + " needs one uv per vertex");
    out << "o " << o.name << '\n' << "usemtl " << o.material << '\n';
    for (const Vec3& v : o.vertices) out << "v " << fmt(v.x()) << ' ' << fmt(v.y()) << ' ' << fmt(v.z()) << '\n';
    for (const Vec2& t : o.uvs) out << "vt " << fmt(t.x()) << ' ' << fmt(t.y()) << '\n';
    for (const auto& f : o.faces) {
      out << 'f';
      for (int k : f) {
        if (k < 0 || static_cast<std::size_t>(k) >= o.vertices.size()) fail(ErrorCode::kInvalidArgument, "face index out of range in " + o.name);
        const std::size_t idx = base + static_cast<std::size_t>(k);
        out << ' ' << idx << '/' << idx;
      }
      out << '\n';
    }
    base += o.vertices.size();
  }
  if (!out) fail(ErrorCode::kIo, "failed writing " + path.string());
}

ObjScene read_obj(const fs::path& path) {
  std::ifstream in = open_in(path);
  ObjScene scene;
  std::vector<Vec3> vertices;
  std::vector<Vec2> uvs;
  std::vector<std::size_t> owner;  // object index for each global vertex
  std::vector<std::size_t> first;  // first global vertex of each object
  std::string line;
  int number = 0;
  const auto bad = [&](const std::string& why) { fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(number) + ": " + why); };
  const auto current = [&]() -> ObjObject& {
    if (scene.objects.empty()) {
      scene.objects.push_back(ObjObject{"default", "", "", {}, {}, {}});
      first.push_back(vertices.size());
    }
    return scene.objects.back();
  };
  while (std::getline(in, line)) {
    ++number;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "mtllib") {
      ss >> scene.mtllib;
    } else if (tag == "o") {
      ObjObject o;
      ss >> o.name;
      scene.objects.push_back(std::move(o));
      first.push_back(vertices.size());
    } else if (tag == "usemtl") {
      ss >> current().material;
    } else if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x() >> v.y() >> v.z())) bad("malformed vertex");
      current().vertices.push_back(v);
      vertices.push_back(v);
      owner.push_back(scene.objects.size() - 1);
    } else if (tag == "vt") {
      Vec2 t;
      if (!(ss >> t.x() >> t.y())) bad("malformed texture coordinate");
      current().uvs.push_back(t);
      uvs.push_back(t);
    } else if (tag == "f") {
      std::array<int, 3> face{};
      std::string token;
      int k = 0;
      while (ss >> token) {
        if (k == 3) bad("only triangles are supported");
        long idx = 0;
        const std::string head = token.substr(0, token.find('/'));
        const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc() || ptr != head.data() + head.size()) bad("malformed face index");
        if (idx < 1 || static_cast<std::size_t>(idx) > vertices.size()) bad("face index out of range");
        const std::size_t g = static_cast<std::size_t>(idx - 1);
        if (owner[g] != scene.objects.size() - 1) bad("face references another object's vertex");
        face[static_cast<std::size_t>(k++)] = static_cast<int>(g - first.back());
      }
      if (k != 3) bad("face needs three vertices");
      current().faces.push_back(face);
    }
  }
  // Texture paths come from the material library when it sits next to the OBJ.
  const fs::path mtl = path.parent_path() / scene.mtllib;
  if (!scene.mtllib.empty() && fs::exists(mtl)) {
    std::ifstream lib = open_in(mtl);
    std::map<std::string, std::string> textures;
    std::string material;
    while (std::getline(lib, line)) {
      std::istringstream ss(line);
      std::string tag;
      if (!(ss >> tag)) continue;
      if (tag == "newmtl") {
        ss >> material;
      } else if (tag == "map_Kd") {
        ss >> textures[material];
      }
    }
    for (ObjObject& o : scene.objects) {
      const auto it = textures.find(o.material);
      if (it != textures.end()) o.texture = it->second;
    }
  }
  return scene;
}

void export_obj(std::span<const PlayerMesh> meshes, const FieldTemplate& field, const fs::path& path) {
  write_obj(path, make_obj_scene(meshes, &field));
}

}  // namespace soccer3d

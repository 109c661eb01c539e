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


// Command-line front end. Flags become a JSON option object that is handed to
// the library through the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "soccer3d.h"

namespace {

enum class Kind { kString, kInt, kDouble, kBool, kList };

struct Flag {
  const char* name;
  Kind kind;
  const char* help;
};

const std::vector<Flag> kPipelineParams = {
    {"edge_spacing", Kind::kDouble, "template sampling step for calibration, meters"},
    {"smoothing_sigma", Kind::kDouble, "distance-map smoothing in pixels"},
    {"max_iterations", Kind::kInt, "optimizer iteration cap"},
    {"padding", Kind::kDouble, "keypoint box padding per side, fraction"},
    {"min_height", Kind::kDouble, "smallest plausible lifted player height, meters"},
    {"max_height", Kind::kDouble, "largest plausible lifted player height, meters"},
    {"dist_thresh", Kind::kDouble, "neck distance for merging detections, pixels"},
    {"frame_window", Kind::kInt, "largest frame gap bridged when merging"},
    {"tau", Kind::kDouble, "association threshold"},
    {"anchor_radius", Kind::kDouble, "skeleton anchor radius, pixels"},
    {"discontinuity", Kind::kDouble, "mesh depth discontinuity threshold, meters"},
    {"smoothness", Kind::kDouble, "trajectory smoothness weight"},
    {"class_match_iou", Kind::kDouble, "box overlap needed to pick a depth-class map"},
    {"workers", Kind::kInt, "worker threads"},
};

struct CommandSpec {
  const char* name;
  const char* help;
  std::vector<Flag> flags;
  bool pipeline_params;
};

const std::vector<CommandSpec> kCommands = {
    {"synth",
     "render a seeded synthetic dataset",
     {{"out", Kind::kString, "output directory"},
      {"seed", Kind::kInt, "random seed"},
      {"frames", Kind::kInt, "frame count"},
      {"players", Kind::kInt, "players per frame"},
      {"width", Kind::kInt, "image width"},
      {"height", Kind::kInt, "image height"},
      {"pan_degrees", Kind::kDouble, "camera pan per frame"},
      {"max_speed", Kind::kDouble, "player speed cap, meters per frame"},
      {"jitter", Kind::kDouble, "edge pixel jitter sigma"},
      {"dropout", Kind::kDouble, "edge dropout rate"},
      {"class_raster", Kind::kInt, "depth-class map resolution"}},
     false},
    {"calibrate",
     "calibrate broadcast cameras from a manifest, or recover game camera matrices from a capture",
     {{"manifest", Kind::kString, "scene manifest"},
      {"out", Kind::kString, "output directory (manifest mode) or glcam JSON path"},
      {"depth", Kind::kString, "capture depth buffer PFM (game camera mode)"},
      {"labels", Kind::kString, "capture label PNG, 1 ground 2 player"},
      {"aux_camera", Kind::kString, "auxiliary field-calibrated camera JSON"},
      {"lambda", Kind::kDouble, "player term weight"},
      {"z_near", Kind::kDouble, "initial near plane"},
      {"z_far", Kind::kDouble, "initial far plane"}},
     true},
    {"track",
     "refine boxes and merge detections into tracks",
     {{"manifest", Kind::kString, "scene manifest"},
      {"out", Kind::kString, "output directory"},
      {"cameras", Kind::kString, "cameras JSON, defaults to <out>/cameras.json"}},
     true},
    {"segment",
     "instance masks for tracked players, or one crop from an anchor image",
     {{"manifest", Kind::kString, "scene manifest"},
      {"out", Kind::kString, "output directory, or mask PNG for a single crop"},
      {"tracks", Kind::kString, "tracks JSON, defaults to <out>/tracks.json"},
      {"image", Kind::kString, "crop PNG (single crop)"},
      {"anchors", Kind::kString, "anchor label PNG (single crop)"},
      {"person_mask", Kind::kString, "coarse person mask PNG (single crop)"},
      {"values", Kind::kString, "write the association field as PFM (single crop)"}},
     true},
    {"lift",
     "lift players onto billboards, decode depth and build meshes",
     {{"manifest", Kind::kString, "scene manifest"},
      {"out", Kind::kString, "output directory"},
      {"cameras", Kind::kString, "cameras JSON, defaults to <out>/cameras.json"},
      {"tracks", Kind::kString, "tracks JSON, defaults to <out>/tracks.json"},
      {"segments", Kind::kString, "directory holding segments.json, defaults to <out>"}},
     true},
    {"smooth",
     "smooth player trajectories, or a single problem JSON",
     {{"out", Kind::kString, "output directory, or trajectory JSON for a single problem"},
      {"problem", Kind::kString, "trajectory problem JSON"},
      {"tracks", Kind::kString, "tracks JSON, defaults to <out>/tracks.json"},
      {"players", Kind::kString, "players JSON, defaults to <out>/players.json"},
      {"smoothness", Kind::kDouble, "smoothness weight"}},
     false},
    {"extract",
     "cut per-player image and depth crops from a game capture",
     {{"depth", Kind::kString, "depth buffer PFM"},
      {"glcam", Kind::kString, "game camera JSON"},
      {"image", Kind::kString, "color buffer PNG"},
      {"out", Kind::kString, "output directory"},
      {"stem", Kind::kString, "output file stem"},
      {"eps", Kind::kDouble, "clustering radius, meters"},
      {"min_pts", Kind::kInt, "clustering density"},
      {"margin", Kind::kInt, "crop margin, pixels"},
      {"ground_eps", Kind::kDouble, "height below which points count as ground"},
      {"half_length", Kind::kDouble, "field half length, meters"},
      {"half_width", Kind::kDouble, "field half width, meters"}},
     false},
    {"eval",
     "score predictions against ground truth into a CSV",
     {{"pred", Kind::kString, "prediction directory"},
      {"gt", Kind::kString, "ground-truth directory"},
      {"kind", Kind::kString, "depth (PFM, st-RMSE) or mask (PNG, IoU)"},
      {"masks", Kind::kString, "evaluation masks for depth"},
      {"out", Kind::kString, "CSV path"}},
     false},
    {"export",
     "merge OBJ files into one scene with a field quad",
     {{"inputs", Kind::kList, "OBJ files"},
      {"out", Kind::kString, "output OBJ"},
      {"field", Kind::kBool, "include the field quad"},
      {"field_template", Kind::kString, "field template JSON"}},
     false},
    {"run",
     "run the full pipeline",
     {{"manifest", Kind::kString, "scene manifest"}, {"out", Kind::kString, "output directory"}},
     true},
};

// Raw flag text, converted to JSON once parsing has succeeded.
struct Slot {
  Flag flag;
  std::string text;
  std::vector<std::string> list;
  bool on = false;
  CLI::Option* option = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("soccer3d ") + s3d_version() + ": 3D reconstruction of soccer broadcasts"};
  app.require_subcommand(1);
  std::map<std::string, std::vector<std::unique_ptr<Slot>>> slots;
  std::map<std::string, std::string> option_files;
  std::map<CLI::App*, std::string> names;
  for (const CommandSpec& spec : kCommands) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    names[sub] = spec.name;
    auto& list = slots[spec.name];
    std::vector<Flag> flags = spec.flags;
    if (spec.pipeline_params) {
      for (const Flag& f : kPipelineParams) {
        bool seen = false;
        for (const Flag& g : flags) seen = seen || std::string(g.name) == f.name;
        if (!seen) flags.push_back(f);
      }
    }
    // Keep the help column to the type name alone.
    CLI::Validator number = CLI::Number;
    number.description("");
    for (const Flag& f : flags) {
      auto slot = std::make_unique<Slot>();
      slot->flag = f;
      const std::string name = std::string("--") + f.name;
      switch (f.kind) {
        case Kind::kBool:
          slot->option = sub->add_flag(name, slot->on, f.help);
          break;
        case Kind::kList:
          slot->option = sub->add_option(name, slot->list, f.help);
          break;
        case Kind::kInt:
          slot->option = sub->add_option(name, slot->text, f.help)->check(number)->type_name("INT");
          break;
        case Kind::kDouble:
          slot->option = sub->add_option(name, slot->text, f.help)->check(number)->type_name("NUMBER");
          break;
        case Kind::kString:
          slot->option = sub->add_option(name, slot->text, f.help)->type_name("TEXT");
          break;
      }
      list.push_back(std::move(slot));
    }
    sub->add_option("--options", option_files[spec.name], "JSON file of options; flags override its keys")
        ->check(CLI::ExistingFile);
  }
  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = names.at(sub);
  nlohmann::json options = nlohmann::json::object();
  try {
    if (!option_files[command].empty()) {
      std::ifstream in(option_files[command]);
      options = nlohmann::json::parse(in);
    }
    for (const auto& slot : slots[command]) {
      if (slot->option->count() == 0) continue;
      const std::string key = slot->flag.name;
      switch (slot->flag.kind) {
        case Kind::kBool:
          options[key] = slot->on;
          break;
        case Kind::kList:
          options[key] = slot->list;
          break;
        case Kind::kInt:
          options[key] = std::stoll(slot->text);
          break;
        case Kind::kDouble:
          options[key] = std::stod(slot->text);
          break;
        case Kind::kString:
          options[key] = slot->text;
          break;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "soccer3d " << command << ": " << e.what() << '\n';
    return 2;
  }

  char* result = nullptr;
  const s3d_status status = s3d_run_command(command.c_str(), options.dump().c_str(), &result);
  if (result) {
    std::cout << result << '\n';
    s3d_string_free(result);
  }
  if (status == S3D_OK) return 0;
  std::cerr << "soccer3d " << command << ": " << s3d_status_name(status) << ": " << s3d_last_error() << '\n';
  return status == S3D_ERR_STAGE_FAILED ? 1 : 2;
}

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

#include "soccer3d/grid.hpp"

namespace soccer3d {

// 8-bit grayscale PNG. Multi-channel inputs are reduced to their first channel.
Mask read_png_gray(const std::filesystem::path& path);
void write_png_gray(const std::filesystem::path& path, const Mask& image);

// 8-bit RGB PNG, channels mapped to [0, 1].
RgbImage read_png_rgb(const std::filesystem::path& path);
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);

// Single-channel PFM ("Pf"), little-endian (scale < 0), rows stored bottom-up.
Grid<float> read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const Grid<float>& image);

}  // namespace soccer3d

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

#include <array>
#include <span>
#include <vector>

#include "soccer3d/geometry.hpp"

namespace soccer3d {

// Anchor label image: 0 tracked player, 1 background, 2 other players, 255 free.
using AnchorMap = Grid<std::uint8_t>;
inline constexpr std::uint8_t kAnchorPlayer = 0;
inline constexpr std::uint8_t kAnchorBackground = 1;
inline constexpr std::uint8_t kAnchorOther = 2;
inline constexpr std::uint8_t kAnchorFree = 255;

// Neighbor k of (x, y) is (x + kNeighborDx[k], y + kNeighborDy[k]).
inline constexpr std::array<int, 8> kNeighborDx = {-1, 0, 1, -1, 1, -1, 0, 1};
inline constexpr std::array<int, 8> kNeighborDy = {-1, -1, -1, 0, 0, 1, 1, 1};

// 8-neighborhood affinities. raw = exp(-|I_p - I_q|^2) * exp(-G_p^2); the
// normalized weights of each pixel sum to 1. Missing neighbors hold 0.
struct Affinity {
  ImageSize size;
  std::vector<std::array<double, 8>> raw;
  std::vector<std::array<double, 8>> normalized;
};

Affinity build_affinity(const RgbImage& image, const Grid<double>& edges);

// Edge strength in [0, 1]: Sobel magnitude of the luminance over its maximum.
Grid<double> edge_strength(const RgbImage& image);

struct AssociationOptions {
  double tolerance = 1e-6;  // l-inf residual
  long max_sweeps = -1;     // -1: 10 * H * W
};

struct AssociationField {
  Grid<double> values;
  long sweeps = 0;
  double residual = 0.0;
};

// Minimizes sum over free pixels of (o_p - sum_q w_pq o_q)^2 with anchors held
// fixed. The free rows form a square system whose solution zeroes every
// residual (the harmonic interpolant), found by over-relaxed Gauss-Seidel.
AssociationField solve_association(const Affinity& affinity, const AnchorMap& anchors,
                                   const AssociationOptions& options = {});

// {p : o_p <= tau}
Mask threshold_mask(const Grid<double>& field, double tau = 0.5);
Mask combine_masks(const Mask& m_o, const Mask& m_cnn);

// Draws anchors along skeleton bones (pairs of pixel positions) with value
// `label`, `radius` pixels thick. Only free pixels are overwritten.
void draw_skeleton_anchors(AnchorMap& anchors, std::span<const std::array<Vec2, 2>> bones, std::uint8_t label,
                           double radius = 1.0);

}  // namespace soccer3d

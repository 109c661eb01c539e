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

#include "soccer3d/depthmesh.hpp"

namespace soccer3d {

// Scale-invariant log RMSE: sqrt(mean(d^2) - mean(d)^2), d = log(pred) - log(gt),
// over pixels valid in both maps (or in `mask` when given).
double st_rmse(const DepthMap& predicted, const DepthMap& truth, const Mask* mask = nullptr);

// |A & B| / |A | B|; 1 when both are empty.
double iou(const Mask& a, const Mask& b);

}  // namespace soccer3d

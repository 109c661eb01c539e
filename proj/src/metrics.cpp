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


#include "soccer3d/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace soccer3d {

double st_rmse(const DepthMap& predicted, const DepthMap& truth, const Mask* mask) {
  require_same_size(predicted.depth, truth.depth, "st_rmse");
  if (mask) require_same_size(*mask, truth.depth, "st_rmse mask");
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  const ImageSize size = truth.size();
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const bool use = mask ? (*mask)(x, y) != 0 : predicted.is_valid(x, y) && truth.is_valid(x, y);
      if (!use) continue;
      const double p = predicted.depth(x, y);
      const double g = truth.depth(x, y);
      if (!(p > 0.0) || !(g > 0.0) || !std::isfinite(p) || !std::isfinite(g)) {
        fail(ErrorCode::kInvalidDepth, "non-positive depth inside the evaluation mask");
      }
      const double d = std::log(p) - std::log(g);
      sum += d;
      sum_sq += d * d;
      ++count;
    }
  }
  if (count == 0) fail(ErrorCode::kEmptyEvaluation, "no pixels to evaluate");
  const double n = static_cast<double>(count);
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
}

double iou(const Mask& a, const Mask& b) {
  require_same_size(a, b, "iou");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.storage().size(); ++i) {
    const bool in_a = a.storage()[i] != 0;
    const bool in_b = b.storage()[i] != 0;
    inter += in_a && in_b;
    uni += in_a || in_b;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace soccer3d

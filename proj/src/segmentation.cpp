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


#include "soccer3d/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <string>

namespace soccer3d {

Affinity build_affinity(const RgbImage& image, const Grid<double>& edges) {
  require_same_size(image, edges, "build_affinity");
  Affinity a;
  a.size = image.size();
  a.raw.assign(image.size().area(), {});
  a.normalized.assign(image.size().area(), {});
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const std::size_t p = image.index(x, y);
      const Rgb& ip = image(x, y);
      const double edge_term = std::exp(-edges(x, y) * edges(x, y));
      double total = 0.0;
      for (int k = 0; k < 8; ++k) {
        const int qx = x + kNeighborDx[static_cast<std::size_t>(k)];
        const int qy = y + kNeighborDy[static_cast<std::size_t>(k)];
        if (!a.size.contains(qx, qy)) continue;
        const Rgb& iq = image(qx, qy);
        const double dr = static_cast<double>(ip.r) - iq.r;
        const double dg = static_cast<double>(ip.g) - iq.g;
        const double db = static_cast<double>(ip.b) - iq.b;
        const double w = std::exp(-(dr * dr + dg * dg + db * db)) * edge_term;
        a.raw[p][static_cast<std::size_t>(k)] = w;
        total += w;
      }
      for (int k = 0; k < 8; ++k) {
        a.normalized[p][static_cast<std::size_t>(k)] = total > 0.0 ? a.raw[p][static_cast<std::size_t>(k)] / total : 0.0;
      }
    }
  }
  return a;
}

Grid<double> edge_strength(const RgbImage& image) {
  const int w = image.width();
  const int h = image.height();
  Grid<double> lum(image.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb& c = image(x, y);
      lum(x, y) = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
    }
  }
  Grid<double> out(image.size(), 0.0);
  double peak = 0.0;
  const auto at = [&](int x, int y) { return lum(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1)) - (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
      const double gy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1)) - (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
      out(x, y) = std::hypot(gx, gy);
      peak = std::max(peak, out(x, y));
    }
  }
  // Rounding residue on a flat image must not be stretched to full strength.
  if (peak > 1e-9) {
    for (double& v : out.storage()) v /= peak;
  } else {
    std::fill(out.storage().begin(), out.storage().end(), 0.0);
  }
  return out;
}

namespace {

bool is_anchor(std::uint8_t label) { return label != kAnchorFree; }

void check_anchor_coverage(const Affinity& affinity, const AnchorMap& anchors) {
  const ImageSize size = affinity.size;
  std::vector<int> component(size.area(), -1);
  int next = 0;
  for (std::size_t seed = 0; seed < size.area(); ++seed) {
    if (component[seed] >= 0) continue;
    bool anchored = false;
    std::deque<std::size_t> queue{seed};
    component[seed] = next;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      anchored = anchored || is_anchor(anchors.storage()[p]);
      const int x = static_cast<int>(p % static_cast<std::size_t>(size.width));
      const int y = static_cast<int>(p / static_cast<std::size_t>(size.width));
      for (std::size_t k = 0; k < 8; ++k) {
        if (affinity.normalized[p][k] <= 0.0) continue;
        const int qx = x + kNeighborDx[k];
        const int qy = y + kNeighborDy[k];
        const std::size_t q = anchors.index(qx, qy);
        if (component[q] < 0) {
          component[q] = next;
          queue.push_back(q);
        }
      }
    }
    if (!anchored) {
      fail(ErrorCode::kUnanchoredRegion, "pixel region containing (" + std::to_string(seed % static_cast<std::size_t>(size.width)) +
                                             ", " + std::to_string(seed / static_cast<std::size_t>(size.width)) +
                                             ") has no anchor");
    }
    ++next;
  }
}

}  // namespace

AssociationField solve_association(const Affinity& affinity, const AnchorMap& anchors, const AssociationOptions& options) {
  if (anchors.size() != affinity.size) fail(ErrorCode::kDimensionMismatch, "solve_association: dimension mismatch");
  const ImageSize size = affinity.size;
  for (std::uint8_t label : anchors.storage()) {
    if (label > kAnchorOther && label != kAnchorFree) fail(ErrorCode::kInvalidArgument, "anchor labels must be 0, 1, 2 or 255");
  }
  check_anchor_coverage(affinity, anchors);

  AssociationField out;
  out.values = Grid<double>(size, 0.0);
  std::vector<std::size_t> free;
  double lo = 2.0;
  double hi = 0.0;
  for (std::size_t p = 0; p < size.area(); ++p) {
    const std::uint8_t label = anchors.storage()[p];
    if (is_anchor(label)) {
      out.values.storage()[p] = label;
      lo = std::min(lo, static_cast<double>(label));
      hi = std::max(hi, static_cast<double>(label));
    } else {
      free.push_back(p);
    }
  }
  if (free.empty()) return out;
  // Start from the midpoint of the anchor range; any start inside it works.
  for (std::size_t p : free) out.values.storage()[p] = 0.5 * (lo + hi);

  std::vector<double>& o = out.values.storage();
  const auto neighbor_mean = [&](std::size_t p) {
    const int x = static_cast<int>(p % static_cast<std::size_t>(size.width));
    const int y = static_cast<int>(p / static_cast<std::size_t>(size.width));
    double s = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
      const double w = affinity.normalized[p][k];
      if (w != 0.0) s += w * o[out.values.index(x + kNeighborDx[k], y + kNeighborDy[k])];
    }
    return s;
  };

  const long cap = options.max_sweeps >= 0 ? options.max_sweeps : 10L * static_cast<long>(size.area());
  const double extent = std::max(size.width, size.height);
  double omega = std::min(1.9, 2.0 / (1.0 + std::sin(std::numbers::pi / (extent + 1.0))));
  double previous = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (long sweep = 0; sweep < cap; ++sweep) {
    for (std::size_t p : free) o[p] += omega * (neighbor_mean(p) - o[p]);
    double residual = 0.0;
    for (std::size_t p : free) residual = std::max(residual, std::abs(o[p] - neighbor_mean(p)));
    out.sweeps = sweep + 1;
    out.residual = residual;
    if (residual < options.tolerance) break;
    // Over-relaxation is not guaranteed for the non-symmetric system; fall
    // back to plain Gauss-Seidel if the residual stops shrinking.
    stalls = residual < previous ? 0 : stalls + 1;
    if (stalls > 20 && omega > 1.0) {
      omega = 1.0;
      stalls = 0;
    }
    previous = residual;
  }
  if (!(out.residual < options.tolerance)) {
    fail(ErrorCode::kConvergence, "association solve stopped at residual " + std::to_string(out.residual) + " after " +
                                      std::to_string(out.sweeps) + " sweeps");
  }
  return out;
}

Mask threshold_mask(const Grid<double>& field, double tau) {
  Mask m(field.size(), 0);
  for (std::size_t i = 0; i < field.storage().size(); ++i) m.storage()[i] = field.storage()[i] <= tau ? 1 : 0;
  return m;
}

Mask combine_masks(const Mask& m_o, const Mask& m_cnn) {
  require_same_size(m_o, m_cnn, "combine_masks");
  Mask m(m_o.size(), 0);
  for (std::size_t i = 0; i < m.storage().size(); ++i) m.storage()[i] = (m_o.storage()[i] && m_cnn.storage()[i]) ? 1 : 0;
  return m;
}

void draw_skeleton_anchors(AnchorMap& anchors, std::span<const std::array<Vec2, 2>> bones, std::uint8_t label, double radius) {
  const int r = static_cast<int>(std::ceil(radius));
  for (const auto& bone : bones) {
    const Vec2 a = bone[0];
    const Vec2 b = bone[1];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const int x0 = static_cast<int>(std::floor(std::min(a.x(), b.x()))) - r;
    const int x1 = static_cast<int>(std::floor(std::max(a.x(), b.x()))) + r;
    const int y0 = static_cast<int>(std::floor(std::min(a.y(), b.y()))) - r;
    const int y1 = static_cast<int>(std::floor(std::max(a.y(), b.y()))) + r;
    for (int y = std::max(y0, 0); y <= std::min(y1, anchors.height() - 1); ++y) {
      for (int x = std::max(x0, 0); x <= std::min(x1, anchors.width() - 1); ++x) {
        const Vec2 c(x + 0.5, y + 0.5);
        const double s = len2 > 0.0 ? std::clamp((c - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        if ((a + s * ab - c).norm() <= radius && anchors(x, y) == kAnchorFree) anchors(x, y) = label;
      }
    }
  }
}

}  // namespace soccer3d

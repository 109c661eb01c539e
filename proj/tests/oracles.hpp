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

// Independent reference implementations used by the unit and acceptance
// tests. They favor directness over speed and share no code with the library
// beyond its data types.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "soccer3d/dataset_extract.hpp"
#include "soccer3d/segmentation.hpp"
#include "soccer3d/trajectory.hpp"

namespace soccer3d::testing {

// Gradient of sum_{t in M} |X_t - D_t|^2 + w sum_t |X_{t-1} - 2 X_t + X_{t+1}|^2
// for one coordinate, written term by term.
inline Eigen::VectorXd trajectory_gradient(const Eigen::VectorXd& x, const std::map<int, double>& d, double w) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (const auto& [t, v] : d) g[t] += 2.0 * (x[t] - v);
  for (int t = 1; t + 1 < n; ++t) {
    const double s = x[t - 1] - 2.0 * x[t] + x[t + 1];
    g[t - 1] += 2.0 * w * s;
    g[t] += -4.0 * w * s;
    g[t + 1] += 2.0 * w * s;
  }
  return g;
}

// Descent on the energy with conjugate directions and exact line search. The
// energy is quadratic, so H v = g(x + v) - g(x) needs nothing but the gradient.
inline std::vector<Vec3> trajectory_descent_oracle(const TrajectoryProblem& p, int max_iterations = 20000) {
  std::vector<Vec3> out(static_cast<std::size_t>(p.n_frames), Vec3::Zero());
  for (int c = 0; c < 3; ++c) {
    std::map<int, double> d;
    for (const auto& [t, v] : p.observations) d[t] = v[c];
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p.n_frames);
    Eigen::VectorXd g = trajectory_gradient(x, d, p.smoothness);
    Eigen::VectorXd dir = -g;
    for (int it = 0; it < max_iterations && g.norm() > 1e-13; ++it) {
      const Eigen::VectorXd hd = trajectory_gradient(x + dir, d, p.smoothness) - g;
      const double curvature = dir.dot(hd);
      if (curvature <= 0.0) break;
      const double step = -g.dot(dir) / curvature;
      x += step * dir;
      const Eigen::VectorXd g_next = trajectory_gradient(x, d, p.smoothness);
      const double beta = std::max(0.0, g_next.dot(g_next - g) / g.dot(g));
      dir = -g_next + beta * dir;
      g = g_next;
    }
    for (int t = 0; t < p.n_frames; ++t) out[static_cast<std::size_t>(t)][c] = x[t];
  }
  return out;
}

inline double trajectory_energy(const TrajectoryProblem& p, const std::vector<Vec3>& x) {
  double e = 0.0;
  for (const auto& [t, v] : p.observations) e += (x[static_cast<std::size_t>(t)] - v).squaredNorm();
  for (std::size_t t = 1; t + 1 < x.size(); ++t) e += p.smoothness * (x[t - 1] - 2.0 * x[t] + x[t + 1]).squaredNorm();
  return e;
}

// Raw 8-neighborhood weights straight from the formula; -1 marks a missing
// neighbor. Neighbor order matches kNeighborDx / kNeighborDy.
inline std::vector<std::array<double, 8>> affinity_formula(const RgbImage& image, const Grid<double>& edges) {
  const int w = image.width();
  const int h = image.height();
  std::vector<std::array<double, 8>> out(static_cast<std::size_t>(w * h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < 8; ++k) {
        const int qx = x + kNeighborDx[static_cast<std::size_t>(k)];
        const int qy = y + kNeighborDy[static_cast<std::size_t>(k)];
        double v = -1.0;
        if (qx >= 0 && qy >= 0 && qx < w && qy < h) {
          const Rgb a = image(x, y);
          const Rgb b = image(qx, qy);
          const double dr = double(a.r) - double(b.r);
          const double dg = double(a.g) - double(b.g);
          const double db = double(a.b) - double(b.b);
          v = std::exp(-(dr * dr + dg * dg + db * db)) * std::exp(-edges(x, y) * edges(x, y));
        }
        out[static_cast<std::size_t>(y * w + x)][static_cast<std::size_t>(k)] = v;
      }
    }
  }
  return out;
}

// Dense least squares over the free pixels: minimize
// sum_{p free} (o_p - sum_q w_pq o_q)^2 with anchors fixed, weights
// row-normalized from the formula.
inline Grid<double> association_dense_oracle(const RgbImage& image, const Grid<double>& edges, const AnchorMap& anchors) {
  const int w = image.width();
  const int h = image.height();
  const auto raw = affinity_formula(image, edges);
  std::vector<int> unknown(static_cast<std::size_t>(w * h), -1);
  int n = 0;
  for (int i = 0; i < w * h; ++i) {
    if (anchors.storage()[static_cast<std::size_t>(i)] == kAnchorFree) unknown[static_cast<std::size_t>(i)] = n++;
  }
  Grid<double> out(image.size(), 0.0);
  for (int i = 0; i < w * h; ++i) {
    const auto a = anchors.storage()[static_cast<std::size_t>(i)];
    if (a != kAnchorFree) out.storage()[static_cast<std::size_t>(i)] = a;
  }
  if (n == 0) return out;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int p = 0; p < w * h; ++p) {
    const int row = unknown[static_cast<std::size_t>(p)];
    if (row < 0) continue;
    A(row, row) += 1.0;
    double sum = 0.0;
    for (double v : raw[static_cast<std::size_t>(p)]) sum += std::max(v, 0.0);
    const int x = p % w;
    const int y = p / w;
    for (int k = 0; k < 8; ++k) {
      const double v = raw[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
      if (v < 0.0) continue;
      const int q = (y + kNeighborDy[static_cast<std::size_t>(k)]) * w + x + kNeighborDx[static_cast<std::size_t>(k)];
      const double wpq = v / sum;
      const int col = unknown[static_cast<std::size_t>(q)];
      if (col >= 0) {
        A(row, col) -= wpq;
      } else {
        b[row] += wpq * anchors.storage()[static_cast<std::size_t>(q)];
      }
    }
  }
  const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
  for (int p = 0; p < w * h; ++p) {
    const int row = unknown[static_cast<std::size_t>(p)];
    if (row >= 0) out.storage()[static_cast<std::size_t>(p)] = sol[row];
  }
  return out;
}

// DBSCAN by definition: core points from an all-pairs count, clusters from the
// transitive closure of core-core adjacency, borders to their nearest core
// (lowest index on ties), everything else noise. Labels are -1 for noise and
// otherwise arbitrary.
inline std::vector<int> dbscan_closure_oracle(const std::vector<Vec3>& pts, double eps, int min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  std::vector<char> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      adj[i][j] = (pts[i] - pts[j]).norm() <= eps;
      count += adj[i][j];
    }
    core[i] = count >= min_pts;
  }
  // reach[i][j]: core i reaches core j through core-core links.
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) reach[i][j] = core[i] && core[j] && adj[i][j];
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) reach[i][j] = reach[i][j] || reach[k][j];
    }
  }
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || label[i] >= 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (reach[i][j]) label[j] = next;
    }
    label[i] = next++;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = 1e300;
    for (std::size_t j = 0; j < n; ++j) {
      if (!core[j] || !adj[i][j]) continue;
      const double d = (pts[i] - pts[j]).norm();
      if (d < best) {
        best = d;
        label[i] = label[j];
      }
    }
  }
  return label;
}

// Same partition up to relabeling, with noise matched exactly.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    const auto [it1, new1] = ab.emplace(a[i], b[i]);
    const auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

}  // namespace soccer3d::testing

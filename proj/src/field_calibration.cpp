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

#include "soccer3d/field_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SVD>

#include "lm.hpp"

namespace soccer3d {

FieldTemplate FieldTemplate::standard(const FieldDimensions& d) {
  FieldTemplate t;
  t.length = d.length;
  t.width = d.width;
  const double hl = d.length / 2.0;
  const double hw = d.width / 2.0;
  auto line = [&](double x0, double z0, double x1, double z1) { t.lines.push_back({Vec3(x0, 0, z0), Vec3(x1, 0, z1)}); };

  line(-hl, -hw, hl, -hw);  // touchlines
  line(-hl, hw, hl, hw);
  line(-hl, -hw, -hl, hw);  // goal lines
  line(hl, -hw, hl, hw);
  line(0, -hw, 0, hw);  // halfway line

  for (const double side : {-1.0, 1.0}) {
    const double goal_x = side * hl;
    const double pa_x = side * (hl - d.penalty_area_depth);
    const double pa_hw = d.penalty_area_width / 2.0;
    line(pa_x, -pa_hw, pa_x, pa_hw);
    line(goal_x, -pa_hw, pa_x, -pa_hw);
    line(goal_x, pa_hw, pa_x, pa_hw);

    const double ga_x = side * (hl - d.goal_area_depth);
    const double ga_hw = d.goal_area_width / 2.0;
    line(ga_x, -ga_hw, ga_x, ga_hw);
    line(goal_x, -ga_hw, ga_x, -ga_hw);
    line(goal_x, ga_hw, ga_x, ga_hw);

    // Penalty arc: the part of the spot-centered circle outside the penalty area.
    const double spot_x = side * (hl - d.penalty_spot_distance);
    const double inside = (d.penalty_area_depth - d.penalty_spot_distance) / d.penalty_arc_radius;
    if (inside < 1.0) {
      const double half = std::acos(std::clamp(inside, -1.0, 1.0));
      const double facing = side > 0 ? std::numbers::pi : 0.0;
      t.arcs.push_back({Vec3(spot_x, 0, 0), d.penalty_arc_radius, facing - half, facing + half});
    }
  }

  // Two halves keep the sampled circle mirror-symmetric for any spacing.
  const double half_pi = std::numbers::pi / 2.0;
  t.arcs.push_back({Vec3::Zero(), d.center_circle_radius, -half_pi, half_pi});
  t.arcs.push_back({Vec3::Zero(), d.center_circle_radius, half_pi, 3.0 * half_pi});

  if (d.corner_arc_radius > 0.0) {
    const double q = std::numbers::pi / 2.0;
    t.arcs.push_back({Vec3(-hl, 0, -hw), d.corner_arc_radius, 0.0, q});
    t.arcs.push_back({Vec3(hl, 0, -hw), d.corner_arc_radius, q, 2.0 * q});
    t.arcs.push_back({Vec3(hl, 0, hw), d.corner_arc_radius, 2.0 * q, 3.0 * q});
    t.arcs.push_back({Vec3(-hl, 0, hw), d.corner_arc_radius, 3.0 * q, 4.0 * q});
  }
  return t;
}

void to_json(nlohmann::json& j, const FieldTemplate& t) {
  j = {{"length", t.length}, {"width", t.width}};
  auto lines = nlohmann::json::array();
  for (const auto& l : t.lines) {
    lines.push_back({{l.a.x(), l.a.y(), l.a.z()}, {l.b.x(), l.b.y(), l.b.z()}});
  }
  auto arcs = nlohmann::json::array();
  for (const auto& a : t.arcs) {
    arcs.push_back({{"center", {a.center.x(), a.center.y(), a.center.z()}},
                    {"radius", a.radius},
                    {"start", a.start_angle},
                    {"end", a.end_angle}});
  }
  j["lines"] = lines;
  j["arcs"] = arcs;
}

void from_json(const nlohmann::json& j, FieldTemplate& t) {
  try {
    FieldDimensions d;
    d.length = j.value("length", d.length);
    d.width = j.value("width", d.width);
    d.penalty_area_depth = j.value("penalty_area_depth", d.penalty_area_depth);
    d.penalty_area_width = j.value("penalty_area_width", d.penalty_area_width);
    d.goal_area_depth = j.value("goal_area_depth", d.goal_area_depth);
    d.goal_area_width = j.value("goal_area_width", d.goal_area_width);
    d.center_circle_radius = j.value("center_circle_radius", d.center_circle_radius);
    d.penalty_spot_distance = j.value("penalty_spot_distance", d.penalty_spot_distance);
    d.penalty_arc_radius = j.value("penalty_arc_radius", d.penalty_arc_radius);
    d.corner_arc_radius = j.value("corner_arc_radius", d.corner_arc_radius);
    if (!(d.length > 0.0) || !(d.width > 0.0)) fail(ErrorCode::kFormat, "field template needs positive length and width");
    if (j.contains("lines") || j.contains("arcs")) {
      t = FieldTemplate{};
      t.length = d.length;
      t.width = d.width;
      for (const auto& l : j.value("lines", nlohmann::json::array())) {
        const auto a = l.at(0).get<std::vector<double>>();
        const auto b = l.at(1).get<std::vector<double>>();
        if (a.size() != 3 || b.size() != 3) fail(ErrorCode::kFormat, "template line endpoints must be 3-vectors");
        t.lines.push_back({Vec3(a[0], 0.0, a[2]), Vec3(b[0], 0.0, b[2])});
      }
      for (const auto& a : j.value("arcs", nlohmann::json::array())) {
        const auto c = a.at("center").get<std::vector<double>>();
        if (c.size() != 3) fail(ErrorCode::kFormat, "arc center must be a 3-vector");
        t.arcs.push_back({Vec3(c[0], 0.0, c[2]), a.at("radius").get<double>(), a.at("start").get<double>(),
                          a.at("end").get<double>()});
      }
    } else {
      t = FieldTemplate::standard(d);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("field template json: ") + e.what());
  }
}

namespace {

std::size_t segment_count(double length, double spacing) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(length / spacing - 1e-9)));
}

}  // namespace

std::vector<Vec3> sample_template_points(const FieldTemplate& field, double spacing) {
  if (!(spacing > 0.0)) fail(ErrorCode::kInvalidArgument, "template spacing must be > 0");
  std::vector<Vec3> out;
  for (const auto& l : field.lines) {
    const std::size_t n = segment_count((l.b - l.a).norm(), spacing);
    for (std::size_t i = 0; i <= n; ++i) {
      Vec3 p = l.a + (l.b - l.a) * (static_cast<double>(i) / static_cast<double>(n));
      p.y() = 0.0;
      out.push_back(p);
    }
  }
  for (const auto& a : field.arcs) {
    const double sweep = a.end_angle - a.start_angle;
    const std::size_t n = segment_count(std::abs(sweep) * a.radius, spacing);
    for (std::size_t i = 0; i <= n; ++i) {
      const double ang = a.start_angle + sweep * (static_cast<double>(i) / static_cast<double>(n));
      out.emplace_back(a.center.x() + a.radius * std::cos(ang), 0.0, a.center.z() + a.radius * std::sin(ang));
    }
  }
  return out;
}

EdgeSet EdgeSet::from_mask(const Mask& mask) {
  EdgeSet e;
  e.image_size = mask.size();
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y) != 0) e.points.emplace_back(x + 0.5, y + 0.5);
  return e;
}

Mask EdgeSet::to_mask() const {
  Mask m(image_size, 0);
  for (const Vec2& p : points) {
    const int x = static_cast<int>(std::floor(p.x()));
    const int y = static_cast<int>(std::floor(p.y()));
    if (image_size.contains(x, y)) m(x, y) = 255;
  }
  return m;
}

EdgeSet extract_edges(const Grid<float>& gray, double threshold, const Mask* exclude) {
  if (exclude != nullptr) require_same_size(gray, *exclude, "extract_edges");
  EdgeSet e;
  e.image_size = gray.size();
  const int w = gray.width();
  const int h = gray.height();
  auto px = [&](int x, int y) {
    return static_cast<double>(gray(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (exclude != nullptr && (*exclude)(x, y) != 0) continue;
      const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      if (std::hypot(gx, gy) > threshold) e.points.emplace_back(x + 0.5, y + 0.5);
    }
  }
  return e;
}

namespace {

// Exact 1D squared distance transform (lower envelope of parabolas).
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                           std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[static_cast<std::size_t>(q)] == inf) continue;
    while (k >= 0) {
      const int p = v[static_cast<std::size_t>(k)];
      const double s = ((f[static_cast<std::size_t>(q)] + q * static_cast<double>(q)) -
                        (f[static_cast<std::size_t>(p)] + p * static_cast<double>(p))) /
                       (2.0 * (q - p));
      if (s <= z[static_cast<std::size_t>(k)]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    if (k == 0) {
      z[0] = -inf;
    } else {
      const int p = v[static_cast<std::size_t>(k - 1)];
      z[static_cast<std::size_t>(k)] = ((f[static_cast<std::size_t>(q)] + q * static_cast<double>(q)) -
                                        (f[static_cast<std::size_t>(p)] + p * static_cast<double>(p))) /
                                       (2.0 * (q - p));
    }
    z[static_cast<std::size_t>(k) + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
    const int p = v[static_cast<std::size_t>(j)];
    d[static_cast<std::size_t>(q)] = (q - p) * static_cast<double>(q - p) + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace

DistanceMap build_distance_map(const EdgeSet& edges) {
  const ImageSize size = edges.image_size;
  if (size.width <= 0 || size.height <= 0) fail(ErrorCode::kInvalidArgument, "edge set has no image size");
  constexpr double inf = std::numeric_limits<double>::infinity();
  Grid<double> g(size, inf);
  bool any = false;
  for (const Vec2& p : edges.points) {
    const int x = static_cast<int>(std::floor(p.x()));
    const int y = static_cast<int>(std::floor(p.y()));
    if (!size.contains(x, y)) continue;
    g(x, y) = 0.0;
    any = true;
  }
  if (!any) fail(ErrorCode::kEmptyEdges, "edge set is empty");

  const int n = std::max(size.width, size.height);
  std::vector<double> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n) + 1);
  std::vector<int> v(static_cast<std::size_t>(n));

  f.resize(static_cast<std::size_t>(size.height));
  d.resize(f.size());
  for (int x = 0; x < size.width; ++x) {
    for (int y = 0; y < size.height; ++y) f[static_cast<std::size_t>(y)] = g(x, y);
    distance_transform_1d(f, d, v, z);
    for (int y = 0; y < size.height; ++y) g(x, y) = d[static_cast<std::size_t>(y)];
  }
  f.resize(static_cast<std::size_t>(size.width));
  d.resize(f.size());
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) f[static_cast<std::size_t>(x)] = g(x, y);
    distance_transform_1d(f, d, v, z);
    for (int x = 0; x < size.width; ++x) g(x, y) = d[static_cast<std::size_t>(x)];
  }
  return DistanceMap(std::move(g));
}

double DistanceMap::sample(const Vec2& pixel) const {
  const int w = values_.width();
  const int h = values_.height();
  const double x = std::clamp(pixel.x() - 0.5, 0.0, static_cast<double>(w - 1));
  const double y = std::clamp(pixel.y() - 0.5, 0.0, static_cast<double>(h - 1));
  const int x0 = std::min(static_cast<int>(x), std::max(w - 2, 0));
  const int y0 = std::min(static_cast<int>(y), std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  return (1 - fx) * (1 - fy) * values_(x0, y0) + fx * (1 - fy) * values_(x1, y0) + (1 - fx) * fy * values_(x0, y1) +
         fx * fy * values_(x1, y1);
}

DistanceMap DistanceMap::smoothed(double sigma) const {
  if (!(sigma > 0.0)) return *this;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += kernel[static_cast<std::size_t>(i + radius)];
  }
  for (double& k : kernel) k /= total;
  const int w = values_.width();
  const int h = values_.height();
  Grid<double> tmp(values_.size());
  Grid<double> out(values_.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) s += kernel[static_cast<std::size_t>(i + radius)] * values_(std::clamp(x + i, 0, w - 1), y);
      tmp(x, y) = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) s += kernel[static_cast<std::size_t>(i + radius)] * tmp(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = s;
    }
  }
  return DistanceMap(std::move(out));
}

std::vector<Correspondence> correspondences_from_json(const nlohmann::json& j) {
  std::vector<Correspondence> out;
  try {
    for (const auto& item : j) {
      const auto w = item.at("world").get<std::vector<double>>();
      const auto p = item.at("pixel").get<std::vector<double>>();
      if (w.size() != 3 || p.size() != 2) fail(ErrorCode::kFormat, "correspondence needs world [x,0,z] and pixel [u,v]");
      out.push_back({Vec3(w[0], w[1], w[2]), Vec2(p[0], p[1])});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("correspondence json: ") + e.what());
  }
  return out;
}

nlohmann::json correspondences_to_json(std::span<const Correspondence> pairs) {
  auto j = nlohmann::json::array();
  for (const auto& c : pairs) {
    j.push_back({{"world", {c.world.x(), c.world.y(), c.world.z()}}, {"pixel", {c.pixel.x(), c.pixel.y()}}});
  }
  return j;
}

namespace {

using Eigen::VectorXd;

// Parameters are (focal, rotation, camera center); the center decouples
// rotation from position far better than the translation vector does.
VectorXd pack(const Camera& c) {
  VectorXd x(7);
  x << c.focal, c.rotation, c.center();
  return x;
}

Camera unpack(const Camera& base, const VectorXd& x) {
  Camera c = base;
  c.focal = x(0);
  c.rotation = x.segment<3>(1);
  c.translation = -rotation_from_axis_angle(c.rotation) * x.segment<3>(4);
  return c;
}

VectorXd camera_steps(const Camera& c) {
  const double reach = std::max(1.0, c.center().norm());
  VectorXd h(7);
  h << 1e-4 * c.focal, 1e-5, 1e-5, 1e-5, 1e-5 * reach, 1e-5 * reach, 1e-5 * reach;
  return h;
}

// Keeps rotation vectors canonical after optimization.
Camera canonicalize(Camera c) {
  c.rotation = axis_angle_from_rotation(rotation_from_axis_angle(c.rotation));
  return c;
}

Eigen::Matrix3d normalizing_transform(const std::vector<Vec2>& pts) {
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double spread = 0.0;
  for (const auto& p : pts) spread += (p - mean).norm();
  spread /= static_cast<double>(pts.size());
  const double s = spread > 0.0 ? std::sqrt(2.0) / spread : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return t;
}

bool collinear(const Vec2& a, const Vec2& b, const Vec2& c, double scale) {
  const Vec2 u = b - a;
  const Vec2 v = c - a;
  return std::abs(u.x() * v.y() - u.y() * v.x()) <= 1e-9 * scale * scale;
}

}  // namespace

Camera init_camera_from_correspondences(std::span<const Correspondence> pairs, ImageSize image_size) {
  if (pairs.size() < 4) fail(ErrorCode::kDegenerateCorrespondences, "at least 4 correspondences are required");
  if (image_size.width <= 0 || image_size.height <= 0) fail(ErrorCode::kInvalidArgument, "image size must be > 0");
  std::vector<Vec2> world, pix;
  for (const auto& c : pairs) {
    world.emplace_back(c.world.x(), c.world.z());
    pix.push_back(c.pixel);
  }
  double scale = 0.0;
  for (const auto& w : world) scale = std::max(scale, (w - world.front()).norm());
  if (scale == 0.0) fail(ErrorCode::kDegenerateCorrespondences, "world points coincide");
  bool all_collinear = true;
  for (std::size_t i = 2; i < world.size() && all_collinear; ++i) {
    std::size_t far = 1;
    for (std::size_t k = 1; k < world.size(); ++k)
      if ((world[k] - world[0]).norm() > (world[far] - world[0]).norm()) far = k;
    all_collinear = collinear(world[0], world[far], world[i], scale);
  }
  if (all_collinear) fail(ErrorCode::kDegenerateCorrespondences, "world points are collinear");
  if (pairs.size() == 4) {
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = a + 1; b < 4; ++b)
        for (std::size_t c = b + 1; c < 4; ++c)
          if (collinear(world[a], world[b], world[c], scale)) {
            fail(ErrorCode::kDegenerateCorrespondences, "three of four world points are collinear");
          }
  }

  const Eigen::Matrix3d tw = normalizing_transform(world);
  const Eigen::Matrix3d tp = normalizing_transform(pix);
  Eigen::MatrixXd a(2 * pairs.size(), 9);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Eigen::Vector3d w = tw * world[i].homogeneous();
    const Eigen::Vector3d p = tp * pix[i].homogeneous();
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << 0, 0, 0, -w.transpose(), p.y() * w.transpose();
    a.row(r + 1) << w.transpose(), 0, 0, 0, -p.x() * w.transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const VectorXd sv = svd.singularValues();
  if (sv.size() >= 8 && sv(7) <= 1e-9 * sv(0)) fail(ErrorCode::kDegenerateCorrespondences, "rank-deficient DLT system");
  const VectorXd hvec = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7), hvec(8);
  Eigen::Matrix3d h = tp.inverse() * hn * tw;

  const Vec2 pp(image_size.width / 2.0, image_size.height / 2.0);
  Eigen::Matrix3d shift;
  shift << 1, 0, -pp.x(), 0, 1, -pp.y(), 0, 0, 1;
  const Eigen::Matrix3d m = shift * h;
  const Eigen::Vector3d a1 = m.col(0);
  const Eigen::Vector3d a2 = m.col(1);

  // Unknown w = 1 / f^2: r1 . r3 = 0 and |r1| = |r3|.
  const double b1 = a1.x() * a2.x() + a1.y() * a2.y();
  const double c1 = a1.z() * a2.z();
  const double b2 = a1.x() * a1.x() + a1.y() * a1.y() - a2.x() * a2.x() - a2.y() * a2.y();
  const double c2 = a1.z() * a1.z() - a2.z() * a2.z();
  const double n1 = std::hypot(b1, c1);
  const double n2 = std::hypot(b2, c2);
  double num = 0.0, den = 0.0;
  if (n1 > 0.0) {
    num += (b1 / n1) * (c1 / n1);
    den += (b1 / n1) * (b1 / n1);
  }
  if (n2 > 0.0) {
    num += (b2 / n2) * (c2 / n2);
    den += (b2 / n2) * (b2 / n2);
  }
  if (!(den > 1e-18)) fail(ErrorCode::kDegenerateCorrespondences, "focal length is unobservable from this view");
  const double w = -num / den;
  if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorCode::kDegenerateCorrespondences, "negative focal estimate");
  const double focal = 1.0 / std::sqrt(w);

  const Eigen::Matrix3d kinv = Eigen::Vector3d(1.0 / focal, 1.0 / focal, 1.0).asDiagonal();
  Eigen::Vector3d r1 = kinv * a1;
  Eigen::Vector3d r3 = kinv * a2;
  Eigen::Vector3d t = kinv * m.col(2);
  double lambda = 2.0 / (r1.norm() + r3.norm());
  const Eigen::Vector3d probe = kinv * m * world[0].homogeneous();
  if (probe.z() * lambda < 0.0) lambda = -lambda;
  r1 *= lambda;
  r3 *= lambda;
  t *= lambda;
  Eigen::Matrix3d r;
  r.col(0) = r1;
  r.col(1) = r3.cross(r1);
  r.col(2) = r3;
  const Eigen::JacobiSVD<Eigen::Matrix3d> rsvd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d rot = rsvd.matrixU() * rsvd.matrixV().transpose();
  if (rot.determinant() < 0.0) {
    Eigen::Matrix3d u = rsvd.matrixU();
    u.col(2) *= -1.0;
    rot = u * rsvd.matrixV().transpose();
  }

  Camera cam = Camera::centered(focal, axis_angle_from_rotation(rot), t, image_size);

  // Polish on reprojection error; the closed form is only exact for exact data.
  const auto residuals = [&](const VectorXd& x, VectorXd& res) {
    const Camera c = unpack(cam, x);
    if (!(c.focal > 0.0)) return false;
    res.resize(static_cast<Eigen::Index>(2 * pairs.size()));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Vec3 pc = c.to_camera(pairs[i].world);
      if (pc.z() <= 1e-9) return false;
      const Vec2 uv = c.principal_point + c.focal * Vec2(pc.x() / pc.z(), pc.y() / pc.z());
      res.segment<2>(static_cast<Eigen::Index>(2 * i)) = uv - pairs[i].pixel;
    }
    return true;
  };
  detail::LmOptions opt;
  opt.max_iterations = 50;
  opt.relative_tolerance = 1e-12;
  opt.steps = camera_steps(cam);
  const detail::LmResult lm = detail::levenberg_marquardt(residuals, pack(cam), opt);
  if (lm.finite) cam = canonicalize(unpack(cam, lm.params));
  if (!(cam.focal > 0.0)) fail(ErrorCode::kDegenerateCorrespondences, "negative focal estimate");
  return cam;
}

double calibration_objective(const Camera& camera, const DistanceMap& dmap, std::span<const Vec3> points, int* visible) {
  const ImageSize size = dmap.image_size();
  const Mat3 r = camera.rotation_matrix();
  double total = 0.0;
  int count = 0;
  for (const Vec3& p : points) {
    const Vec3 c = r * p + camera.translation;
    if (c.z() <= 1e-9) continue;
    const Vec2 uv = camera.principal_point + camera.focal * Vec2(c.x() / c.z(), c.y() / c.z());
    if (!(uv.x() >= 0.0 && uv.y() >= 0.0 && uv.x() < size.width && uv.y() < size.height)) continue;
    total += dmap.sample(uv);
    ++count;
  }
  if (visible != nullptr) *visible = count;
  return total;
}

RefineResult refine_camera(const Camera& init, const DistanceMap& dmap, std::span<const Vec3> template_points,
                           const RefineOptions& options) {
  init.validate();
  if (dmap.image_size() != init.image_size) fail(ErrorCode::kDimensionMismatch, "distance map and camera image sizes differ");
  if (!(options.max_focal_ratio >= 1.0)) fail(ErrorCode::kInvalidArgument, "max_focal_ratio must be at least 1");
  const ImageSize size = dmap.image_size();

  RefineResult result;
  result.camera = init;
  result.initial_objective = calibration_objective(init, dmap, template_points, &result.visible_points);
  if (!std::isfinite(result.initial_objective)) fail(ErrorCode::kDiverged, "initial objective is not finite");
  const double needed = options.min_visible_fraction * static_cast<double>(template_points.size());
  if (template_points.empty() || result.visible_points < needed) {
    fail(ErrorCode::kInsufficientVisibility, "only " + std::to_string(result.visible_points) + " of " +
                                                 std::to_string(template_points.size()) + " template points are visible");
  }

  Camera current = init;
  // Coarse to fine: heavier smoothing first widens the basin, the last
  // level runs at the configured sigma.
  for (int level = std::max(options.coarse_levels, 0); level >= 0; --level) {
  const DistanceMap smooth = dmap.smoothed(options.smoothing_sigma * std::ldexp(1.0, level));
  std::vector<Vec3> active;

  // The visible subset is frozen per solve; a second solve picks up points
  // that entered the frame.
  for (int round = 0; round < 3; ++round) {
    std::vector<Vec3> next;
    const Mat3 rc = current.rotation_matrix();
    for (const Vec3& p : template_points) {
      const Vec3 c = rc * p + current.translation;
      if (c.z() <= 1e-9) continue;
      const Vec2 uv = current.principal_point + current.focal * Vec2(c.x() / c.z(), c.y() / c.z());
      if (uv.x() >= 0.0 && uv.y() >= 0.0 && uv.x() < size.width && uv.y() < size.height) next.push_back(p);
    }
    if (round > 0 && next.size() == active.size()) break;
    active = std::move(next);

    const auto project_active = [&](const VectorXd& x, std::vector<Vec2>& uvs) {
      const Camera c = unpack(current, x);
      if (!(c.focal > 0.0) || !(c.rotation.norm() < 2.0 * std::numbers::pi)) return false;
      // Shrinking the focal pulls every frozen point toward the principal
      // point, where the chamfer sum can drop without any alignment; keep
      // the zoom within a trust region of the initialization.
      if (c.focal < init.focal / options.max_focal_ratio || c.focal > init.focal * options.max_focal_ratio) return false;
      const Mat3 rot = c.rotation_matrix();
      uvs.resize(active.size());
      for (std::size_t i = 0; i < active.size(); ++i) {
        const Vec3 pc = rot * active[i] + c.translation;
        if (pc.z() <= 1e-9) return false;
        uvs[i] = c.principal_point + c.focal * Vec2(pc.x() / pc.z(), pc.y() / pc.z());
      }
      return true;
    };
    std::vector<Vec2> uv0, uvp, uvm;
    const auto residuals = [&](const VectorXd& x, VectorXd& res) {
      if (!project_active(x, uv0)) return false;
      res.resize(static_cast<Eigen::Index>(active.size()));
      for (std::size_t i = 0; i < active.size(); ++i) {
        res(static_cast<Eigen::Index>(i)) = std::sqrt(std::max(smooth.sample(uv0[i]), 0.0));
      }
      return true;
    };
    // Chain rule: image gradient of the smoothed map (half-pixel central
    // differences) times the projection derivatives.
    const VectorXd steps = camera_steps(current);
    const auto jacobian = [&](const VectorXd& x, Eigen::MatrixXd& jac) {
      if (!project_active(x, uv0)) return false;
      const auto m = static_cast<Eigen::Index>(active.size());
      jac.resize(m, 7);
      Eigen::MatrixXd grad(m, 2);
      VectorXd r(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const Vec2& uv = uv0[static_cast<std::size_t>(i)];
        const double d = std::max(smooth.sample(uv), 0.0);
        r(i) = std::sqrt(d);
        grad(i, 0) = smooth.sample(uv + Vec2(0.5, 0.0)) - smooth.sample(uv - Vec2(0.5, 0.0));
        grad(i, 1) = smooth.sample(uv + Vec2(0.0, 0.5)) - smooth.sample(uv - Vec2(0.0, 0.5));
      }
      for (Eigen::Index k = 0; k < 7; ++k) {
        VectorXd xp = x, xm = x;
        xp(k) += steps(k);
        xm(k) -= steps(k);
        if (!project_active(xp, uvp) || !project_active(xm, uvm)) return false;
        for (Eigen::Index i = 0; i < m; ++i) {
          const auto s = static_cast<std::size_t>(i);
          const Vec2 duv = (uvp[s] - uvm[s]) / (2.0 * steps(k));
          jac(i, k) = (grad(i, 0) * duv.x() + grad(i, 1) * duv.y()) / (2.0 * std::max(r(i), 1e-6));
        }
      }
      return true;
    };
    detail::LmOptions opt;
    opt.max_iterations = options.max_iterations;
    opt.relative_tolerance = options.relative_tolerance;
    opt.jacobian = jacobian;
    const detail::LmResult lm = detail::levenberg_marquardt(residuals, pack(current), opt);
    if (!lm.finite) fail(ErrorCode::kDiverged, "refinement objective is not finite");
    result.iterations += lm.iterations;
    result.accepted_costs.insert(result.accepted_costs.end(), lm.accepted_costs.begin(), lm.accepted_costs.end());
    current = canonicalize(unpack(current, lm.params));

    // sqrt(D) has a flat bottom (the smoothed map never reaches zero), so
    // Gauss-Newton crawls near the optimum. Polish with half the map
    // gradient, which for a squared distance is the offset to the nearest
    // edge and is linear in the misalignment.
    const VectorXd polish_steps = camera_steps(current);
    const auto half_gradient = [&](const Vec2& uv) -> Vec2 {
      return Vec2(smooth.sample(uv + Vec2(0.5, 0.0)) - smooth.sample(uv - Vec2(0.5, 0.0)),
                  smooth.sample(uv + Vec2(0.0, 0.5)) - smooth.sample(uv - Vec2(0.0, 0.5))) *
             0.5;
    };
    const auto offsets = [&](const VectorXd& x, VectorXd& res) {
      if (!project_active(x, uv0)) return false;
      res.resize(2 * static_cast<Eigen::Index>(active.size()));
      for (std::size_t i = 0; i < active.size(); ++i) res.segment<2>(2 * static_cast<Eigen::Index>(i)) = half_gradient(uv0[i]);
      return true;
    };
    const auto offsets_jacobian = [&](const VectorXd& x, Eigen::MatrixXd& jac) {
      if (!project_active(x, uv0)) return false;
      const auto m = static_cast<Eigen::Index>(active.size());
      jac.resize(2 * m, 7);
      std::vector<Eigen::Matrix2d> hess(active.size());
      for (std::size_t i = 0; i < active.size(); ++i) {
        hess[i].col(0) = half_gradient(uv0[i] + Vec2(0.5, 0.0)) - half_gradient(uv0[i] - Vec2(0.5, 0.0));
        hess[i].col(1) = half_gradient(uv0[i] + Vec2(0.0, 0.5)) - half_gradient(uv0[i] - Vec2(0.0, 0.5));
      }
      for (Eigen::Index k = 0; k < 7; ++k) {
        VectorXd xp = x, xm = x;
        xp(k) += polish_steps(k);
        xm(k) -= polish_steps(k);
        if (!project_active(xp, uvp) || !project_active(xm, uvm)) return false;
        for (Eigen::Index i = 0; i < m; ++i) {
          const auto s = static_cast<std::size_t>(i);
          jac.block<2, 1>(2 * i, k) = hess[s] * ((uvp[s] - uvm[s]) / (2.0 * polish_steps(k)));
        }
      }
      return true;
    };
    detail::LmOptions polish = opt;
    polish.jacobian = offsets_jacobian;
    const detail::LmResult fine = detail::levenberg_marquardt(offsets, pack(current), polish);
    if (!fine.finite) fail(ErrorCode::kDiverged, "refinement objective is not finite");
    result.iterations += fine.iterations;
    result.accepted_costs.insert(result.accepted_costs.end(), fine.accepted_costs.begin(), fine.accepted_costs.end());
    const Camera polished = canonicalize(unpack(current, fine.params));
    if (calibration_objective(polished, smooth, active) <= calibration_objective(current, smooth, active)) current = polished;
  }
  }

  int visible = 0;
  const double final_objective = calibration_objective(current, dmap, template_points, &visible);
  if (!std::isfinite(final_objective)) fail(ErrorCode::kDiverged, "final objective is not finite");
  if (final_objective <= result.initial_objective) {
    result.camera = current;
    result.final_objective = final_objective;
    result.visible_points = visible;
  } else {
    result.final_objective = result.initial_objective;
  }
  return result;
}

SequenceCalibration calibrate_sequence(std::span<const EdgeSet> frames, std::span<const Correspondence> first_frame_pairs,
                                       std::span<const Vec3> template_points, const RefineOptions& options) {
  if (frames.empty()) fail(ErrorCode::kInvalidArgument, "calibrate_sequence needs at least one frame");
  SequenceCalibration out;
  Camera previous;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    try {
      const Camera init = k == 0 ? init_camera_from_correspondences(first_frame_pairs, frames[0].image_size) : previous;
      const DistanceMap dmap = build_distance_map(frames[k]);
      RefineResult r = refine_camera(init, dmap, template_points, options);
      previous = r.camera;
      out.cameras.push_back(r.camera);
      out.refinements.push_back(std::move(r));
    } catch (const Error& e) {
      out.failure = FrameFailure{k, e.code(), "frame " + std::to_string(k) + ": " + e.what()};
      break;
    }
  }
  return out;
}

}  // namespace soccer3d

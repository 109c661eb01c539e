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


#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "soccer3d/dataset_extract.hpp"
#include "soccer3d/synth.hpp"
#include "test_util.hpp"

namespace soccer3d {
namespace {

using testing::uniform;

BroadcastSceneOptions small_scene(int players) {
  BroadcastSceneOptions o;
  o.image_size = {480, 270};
  o.players = players;
  return o;
}

std::vector<Vec3> worlds(const std::vector<CloudPoint>& pts) {
  std::vector<Vec3> out;
  for (const CloudPoint& p : pts) out.push_back(p.world);
  return out;
}

TEST(ExtractPointCloud, EmptyFieldLiesOnGround) {
  const SynthScene scene = make_broadcast_scene(5, small_scene(0));
  const NdcRender r = render_ndc(scene);
  const PointCloud cloud = extract_point_cloud(r.capture);
  EXPECT_EQ(cloud.points.size() + cloud.dropped, static_cast<std::size_t>(r.capture.color.size().area()));
  std::size_t ground = 0;
  for (const CloudPoint& p : cloud.points) {
    if (r.labels(p.x, p.y) != kLabelGround) continue;
    ++ground;
    EXPECT_NEAR(p.world.y(), 0.0, 1e-3);
  }
  EXPECT_GT(ground, cloud.points.size() / 2);
  EXPECT_TRUE(filter_players(cloud.points).empty());
}

TEST(ExtractPointCloud, OutOfRangeDepthIsDropped) {
  const SynthScene scene = make_broadcast_scene(5, small_scene(0));
  NdcRender r = render_ndc(scene);
  const std::size_t before = extract_point_cloud(r.capture).dropped;
  r.capture.ndc_depth(3, 4) = 1.5;
  r.capture.ndc_depth(7, 1) = -0.2;
  const PointCloud cloud = extract_point_cloud(r.capture);
  EXPECT_EQ(cloud.dropped, before + 2);
  EXPECT_EQ(cloud.points.size() + cloud.dropped, static_cast<std::size_t>(r.capture.color.size().area()));
  r.capture.ndc_depth = Grid<double>(ImageSize{4, 4}, 0.5);
  EXPECT_THROW(extract_point_cloud(r.capture), Error);
}

TEST(ExtractPointCloud, PlayerPointsLieOnTheirBoxes) {
  const SynthScene scene = make_broadcast_scene(11, small_scene(4));
  const NdcRender r = render_ndc(scene);
  const PointCloud cloud = extract_point_cloud(r.capture);
  std::size_t checked = 0;
  for (const CloudPoint& p : cloud.points) {
    const int who = r.player_index(p.x, p.y);
    if (who < 0) continue;
    ++checked;
    EXPECT_LE(std::abs(primitive_surface_residual(scene.players[static_cast<std::size_t>(who)], p.world)), 1e-3);
  }
  EXPECT_GT(checked, 100u);
}

TEST(FilterPlayers, Examples) {
  const std::vector<CloudPoint> pts = {{Vec3(0, 1, 0), 0, 0},     {Vec3(0, 0.01, 0), 1, 0}, {Vec3(60, 1, 0), 2, 0},
                                       {Vec3(0, 1, 40), 3, 0},    {Vec3(-52.5, 0.06, 34), 4, 0}, {Vec3(10, -1, 5), 5, 0}};
  const auto kept = filter_players(pts);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].x, 0);
  EXPECT_EQ(kept[1].x, 4);
  const auto again = filter_players(kept);
  EXPECT_EQ(again.size(), kept.size());
  FieldBounds tight;
  tight.ground_eps = 2.0;
  EXPECT_TRUE(filter_players(pts, tight).empty());
}

std::vector<Vec3> blob(std::mt19937_64& rng, const Vec3& center, int n, double radius) {
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) out.push_back(center + radius * testing::random_unit(rng) * uniform(rng, 0, 1));
  return out;
}

TEST(Dbscan, BlobsAndIsolatedNoise) {
  std::mt19937_64 rng(4);
  std::vector<Vec3> pts = blob(rng, Vec3(0, 1, 0), 60, 0.3);
  const auto b = blob(rng, Vec3(5, 1, 0), 40, 0.3);
  pts.insert(pts.end(), b.begin(), b.end());
  pts.push_back(Vec3(20, 1, 20));
  pts.push_back(Vec3(-20, 1, 20));
  const auto labels = dbscan(pts, 0.5, 20);
  for (int i = 0; i < 60; ++i) EXPECT_EQ(labels[i], 0);
  for (int i = 60; i < 100; ++i) EXPECT_EQ(labels[i], 1);
  EXPECT_EQ(labels[100], kNoise);
  EXPECT_EQ(labels[101], kNoise);
  EXPECT_TRUE(dbscan({}, 0.5, 20).empty());
}

TEST(Dbscan, InvalidArguments) {
  const std::vector<Vec3> pts = {Vec3::Zero()};
  EXPECT_THROW(dbscan(pts, 0.0, 1), Error);
  EXPECT_THROW(dbscan(pts, 0.5, 0), Error);
  const std::vector<Vec3> bad = {Vec3(std::nan(""), 0, 0)};
  EXPECT_THROW(dbscan(bad, 0.5, 1), Error);
  EXPECT_EQ(dbscan(pts, 0.5, 1), std::vector<int>{0});
}

TEST(Dbscan, MatchesClosureOracleOnRandomClouds) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> pts;
    const int clusters = static_cast<int>(uniform(rng, 1, 5));
    for (int c = 0; c < clusters; ++c) {
      const auto b = blob(rng, Vec3(uniform(rng, -4, 4), uniform(rng, 0, 2), uniform(rng, -4, 4)), static_cast<int>(uniform(rng, 5, 40)),
                          uniform(rng, 0.2, 1.0));
      pts.insert(pts.end(), b.begin(), b.end());
    }
    for (int k = 0; k < 10; ++k) pts.push_back(Vec3(uniform(rng, -6, 6), uniform(rng, 0, 2), uniform(rng, -6, 6)));
    const double eps = uniform(rng, 0.2, 0.8);
    const int min_pts = static_cast<int>(uniform(rng, 2, 10));
    const auto got = dbscan(pts, eps, min_pts);
    EXPECT_EQ(got, testing::dbscan_closure_oracle(pts, eps, min_pts)) << "trial " << trial;

    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vec3> shuffled;
    for (std::size_t i : perm) shuffled.push_back(pts[i]);
    const auto relabeled = dbscan(shuffled, eps, min_pts);
    std::vector<int> back(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) back[perm[i]] = relabeled[i];
    EXPECT_TRUE(testing::same_partition(back, got)) << "trial " << trial;
  }
}

class CropPairs : public ::testing::TestWithParam<int> {};

TEST_P(CropPairs, OnePairPerPlayer) {
  const int k = GetParam();
  BroadcastSceneOptions o = small_scene(k);
  o.image_size = {960, 540};
  o.min_player_spacing = 3.0;
  const SynthScene scene = make_broadcast_scene(31 + static_cast<std::uint64_t>(k), o);
  const NdcRender r = render_ndc(scene);
  const auto players = filter_players(extract_point_cloud(r.capture).points);
  const auto labels = dbscan(worlds(players), 0.5, 20);
  std::size_t skipped = 99;
  const auto pairs = emit_crop_pairs(r.capture, players, labels, {}, &skipped);
  EXPECT_EQ(pairs.size(), static_cast<std::size_t>(k));
  EXPECT_EQ(skipped, 0u);
  for (const CropPair& p : pairs) {
    EXPECT_EQ(p.image.size(), p.depth.depth.size());
    EXPECT_GE(p.x0, 0);
    EXPECT_GE(p.y0, 0);
    EXPECT_LE(p.x0 + p.image.width(), 960);
    EXPECT_LE(p.y0 + p.image.height(), 540);
    std::size_t valid = 0;
    for (int y = 0; y < p.image.height(); ++y) {
      for (int x = 0; x < p.image.width(); ++x) {
        EXPECT_EQ(p.image(x, y), r.capture.color(p.x0 + x, p.y0 + y));
        if (!p.depth.is_valid(x, y)) continue;
        ++valid;
        EXPECT_EQ(r.labels(p.x0 + x, p.y0 + y), kLabelPlayer);
        EXPECT_NEAR(p.depth.depth(x, y), r.eye_depth(p.x0 + x, p.y0 + y), 1e-6);
      }
    }
    EXPECT_EQ(valid, p.cluster_size);
  }
}

INSTANTIATE_TEST_SUITE_P(PlayerCounts, CropPairs, ::testing::Values(1, 2, 5, 11));

TEST(EmitCropPairs, NoiseOnlyAndMismatch) {
  const SynthScene scene = make_broadcast_scene(5, small_scene(0));
  const NdcRender r = render_ndc(scene);
  const std::vector<CloudPoint> pts = {{Vec3(0, 1, 0), 0, 0}};
  const std::vector<int> noise = {kNoise};
  EXPECT_TRUE(emit_crop_pairs(r.capture, pts, noise).empty());
  EXPECT_THROW(emit_crop_pairs(r.capture, pts, std::vector<int>{}), Error);
  CropOptions bad;
  bad.margin = -1;
  EXPECT_THROW(emit_crop_pairs(r.capture, pts, noise, bad), Error);
}

}  // namespace
}  // namespace soccer3d

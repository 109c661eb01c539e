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

#include <cmath>

#include "soccer3d/gamecam.hpp"
#include "soccer3d/synth.hpp"
#include "test_util.hpp"

namespace soccer3d {
namespace {

struct GameFixture {
  SynthScene scene;
  NdcCapture capture;
  GameCamParams truth;
};

GameFixture make_fixture(std::uint64_t seed) {
  BroadcastSceneOptions o;
  o.players = 5;
  o.image_size = {480, 270};
  GameFixture f;
  f.scene = make_broadcast_scene(seed, o);
  const NdcRender r = render_ndc(f.scene);
  f.capture = NdcCapture::from_labels(r.capture.ndc_depth, r.labels);
  f.truth = GameCamParams{f.scene.camera.rotation, f.scene.camera.translation, f.scene.camera.focal, f.scene.z_near, f.scene.z_far};
  return f;
}

GameCamParams perturbed(const GameCamParams& truth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coin(0, 1);
  const auto factor = [&] { return coin(rng) ? 1.05 : 0.95; };
  GameCamParams p = truth;
  for (int k = 0; k < 3; ++k) {
    p.rotation(k) *= factor();
    p.translation(k) *= factor();
  }
  p.focal *= factor();
  p.z_near *= factor();
  p.z_far *= factor();
  return p;
}

double max_player_error(const GameFixture& f, const GlCamera& recovered) {
  const NdcUnprojector a(recovered);
  const NdcUnprojector b(f.scene.glcam());
  double err = 0.0;
  for (const PixelIndex& p : f.capture.player_pixels) {
    const Vec2 c(p.x + 0.5, p.y + 0.5);
    const double d = f.capture.depth(p.x, p.y);
    err = std::max(err, (a(c, d) - b(c, d)).norm());
  }
  return err;
}

TEST(NdcCapture, FromLabelsSplitsPixels) {
  Grid<std::uint8_t> labels(3, 2, kGameLabelOther);
  labels(1, 0) = kGameLabelGround;
  labels(2, 1) = kGameLabelGround;
  labels(0, 1) = kGameLabelPlayer;
  const NdcCapture c = NdcCapture::from_labels(Grid<double>(3, 2, 0.5), labels);
  EXPECT_EQ(c.ground_pixels, (std::vector<PixelIndex>{{1, 0}, {2, 1}}));
  EXPECT_EQ(c.player_pixels, (std::vector<PixelIndex>{{0, 1}}));
  EXPECT_NO_THROW(c.validate());
  NdcCapture bad = c;
  bad.depth(0, 0) = 1.5;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.player_pixels.push_back({1, 0});
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_THROW(NdcCapture::from_labels(Grid<double>(2, 2, 0.5), labels), Error);
}

TEST(GroundTargets, StraightDownCameraHitsBelowItself) {
  const Camera down = Camera::centered(1000.0, Vec3(-M_PI / 2, 0, 0), Vec3(0, 0, 10), {641, 481});
  ASSERT_NEAR(down.center().y(), 10.0, 1e-12);
  const std::vector<PixelIndex> px = {{320, 240}, {0, 0}};
  const GroundTargets t = ground_targets(down, px);
  ASSERT_EQ(t.points.size(), 2u);
  EXPECT_LE(t.points[0].norm(), 1e-9);
  EXPECT_EQ(t.points[1].y(), 0.0);
  EXPECT_EQ(t.pixels, px);
  EXPECT_EQ(t.dropped, 0u);
}

TEST(GroundTargets, RaysAboveTheHorizonAreDropped) {
  const Camera level = Camera::look_at(500.0, Vec3(0, 2, 0), Vec3(0, 2, 10), {100, 100});
  std::vector<PixelIndex> px;
  for (int y = 0; y < 100; y += 10) px.push_back({50, y});
  const GroundTargets t = ground_targets(level, px);
  EXPECT_EQ(t.points.size() + t.dropped, px.size());
  EXPECT_GT(t.dropped, 0u);
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    EXPECT_EQ(t.points[i].y(), 0.0);
    EXPECT_GE(t.pixels[i].y, 50);
  }
}

TEST(RecoverGameCamera, TruthIsAFixedPoint) {
  const GameFixture f = make_fixture(0);
  EXPECT_LT(game_camera_objective(f.capture, f.scene.camera, f.truth), 1e-6);
  const GameCamResult r = recover_game_camera(f.capture, f.scene.camera, f.truth);
  EXPECT_LT(r.final_objective, 1e-6);
  EXPECT_NEAR(r.params.focal, f.truth.focal, 1e-6 * f.truth.focal);
  EXPECT_NEAR(r.params.z_near, f.truth.z_near, 1e-6);
  EXPECT_NEAR(r.params.z_far, f.truth.z_far, 1e-3);
  EXPECT_LT(max_player_error(f, r.glcam), 1e-4);
}

TEST(RecoverGameCamera, RecoversPerturbedStart) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const GameFixture f = make_fixture(seed);
    const GameCamParams init = perturbed(f.truth, seed);
    const GameCamResult r = recover_game_camera(f.capture, f.scene.camera, init);
    EXPECT_LT(r.final_objective, 1e-2 * r.initial_objective) << "seed " << seed;
    EXPECT_LT(max_player_error(f, r.glcam), 1e-3) << "seed " << seed;
    EXPECT_NEAR(r.params.focal / f.truth.focal, 1.0, 1e-4);
    EXPECT_NEAR(r.params.z_near, f.truth.z_near, 1e-3);
    EXPECT_NEAR(r.params.z_far / f.truth.z_far, 1.0, 1e-3);
    ASSERT_FALSE(r.accepted_costs.empty());
    for (std::size_t k = 1; k < r.accepted_costs.size(); ++k) EXPECT_LE(r.accepted_costs[k], r.accepted_costs[k - 1]);
    EXPECT_NEAR(r.accepted_costs.back(), r.final_objective, 1e-9 * (1.0 + r.final_objective));
    EXPECT_NEAR(r.final_objective, r.ground_term + 0.01 * r.player_term, 1e-9 * (1.0 + r.final_objective));
  }
}

TEST(RecoverGameCamera, InvalidInputs) {
  const GameFixture f = make_fixture(1);
  GameCamOptions o;
  o.lambda = -1.0;
  EXPECT_THROW(recover_game_camera(f.capture, f.scene.camera, f.truth, o), Error);
  GameCamParams bad = f.truth;
  bad.z_far = 0.5;
  EXPECT_THROW(recover_game_camera(f.capture, f.scene.camera, bad), Error);
  NdcCapture few = f.capture;
  few.player_pixels.resize(3);
  try {
    recover_game_camera(few, f.scene.camera, f.truth);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientVisibility);
  }
  Camera other = f.scene.camera;
  other.image_size = {10, 10};
  EXPECT_THROW(recover_game_camera(f.capture, other, f.truth), Error);
}

}  // namespace
}  // namespace soccer3d

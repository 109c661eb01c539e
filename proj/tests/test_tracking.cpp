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
#include <set>

#include "soccer3d/tracking.hpp"
#include "test_util.hpp"

namespace soccer3d {
namespace {

using testing::uniform;

Keypoints stick_figure(const Vec2& neck, double scale = 1.0) {
  return {{"head", {neck + Vec2(0, -15) * scale, 1.0}},
          {"neck", {neck, 1.0}},
          {"left_hip", {neck + Vec2(-8, 50) * scale, 1.0}},
          {"right_hip", {neck + Vec2(8, 50) * scale, 1.0}},
          {"left_ankle", {neck + Vec2(-10, 100) * scale, 1.0}},
          {"right_ankle", {neck + Vec2(10, 100) * scale, 1.0}}};
}

Detection neck_detection(int frame, const Vec2& neck) {
  Detection d;
  d.frame = frame;
  d.bbox = PixelBox{neck.x() - 10, neck.y() - 20, 20, 120};
  d.keypoints = {{"neck", {neck, 1.0}}};
  return d;
}

TEST(RefineBoxes, SinglePoseGetsPaddedKeypointBox) {
  const Keypoints k = stick_figure(Vec2(100, 100));
  const Detection box{0, PixelBox{80, 70, 40, 140}, {}, std::nullopt};
  const Pose pose{0, k};
  std::size_t dropped = 99;
  const auto out = refine_boxes(std::span(&box, 1), std::span(&pose, 1), {640, 480}, nullptr, {}, &dropped);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(dropped, 0u);
  // Keypoints span x 90..110 and y 85..200.
  EXPECT_NEAR(out[0].bbox.x, 90 - 2.0, 1e-12);
  EXPECT_NEAR(out[0].bbox.y, 85 - 11.5, 1e-12);
  EXPECT_NEAR(out[0].bbox.width, 24.0, 1e-12);
  EXPECT_NEAR(out[0].bbox.height, 115 * 1.2, 1e-12);
  EXPECT_EQ(out[0].keypoints.size(), k.size());
}

TEST(RefineBoxes, ClipsToImage) {
  const Pose pose{0, stick_figure(Vec2(5, 10))};
  const auto out = refine_boxes({}, std::span(&pose, 1), {100, 100});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].bbox.x, 0.0);
  EXPECT_EQ(out[0].bbox.y, 0.0);
  EXPECT_LE(out[0].bbox.x + out[0].bbox.width, 100.0);
  EXPECT_LE(out[0].bbox.y + out[0].bbox.height, 100.0);
}

TEST(RefineBoxes, OverlappingBoxesSeparatedByPose) {
  const std::vector<Detection> boxes = {{0, PixelBox{70, 70, 60, 150}, {}, std::nullopt},
                                        {0, PixelBox{95, 70, 60, 150}, {}, std::nullopt}};
  const std::vector<Pose> poses = {{0, stick_figure(Vec2(95, 90))}, {0, stick_figure(Vec2(130, 90))}};
  std::size_t dropped = 99;
  const auto out = refine_boxes(boxes, poses, {640, 480}, nullptr, {}, &dropped);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(dropped, 0u);
  EXPECT_LT(out[0].bbox.x + out[0].bbox.width / 2, out[1].bbox.x + out[1].bbox.width / 2);
  EXPECT_EQ(out[0].keypoints.at("neck").position, Vec2(95, 90));
  EXPECT_EQ(out[1].keypoints.at("neck").position, Vec2(130, 90));
}

TEST(RefineBoxes, UnmatchedPoseBecomesDetectionAndUnclaimedBoxIsDropped) {
  const Detection far{0, PixelBox{500, 300, 20, 50}, {}, std::nullopt};
  const Pose pose{0, stick_figure(Vec2(100, 100))};
  std::size_t dropped = 0;
  const auto out = refine_boxes(std::span(&far, 1), std::span(&pose, 1), {640, 480}, nullptr, {}, &dropped);
  EXPECT_EQ(out.size(), 1u);
  EXPECT_EQ(dropped, 1u);
  EXPECT_TRUE(refine_boxes({}, {}, {640, 480}).empty());
}

TEST(RefineBoxes, ImplausibleHeightDroppedWithCamera) {
  const Camera cam = Camera::look_at(1200.0, Vec3(0, 15, -60), Vec3(0, 0, 0), {960, 540});
  const auto pose_of_height = [&](double h) {
    Keypoints k;
    k["left_ankle"] = {project(cam, Vec3(-0.1, 0, 5)), 1.0};
    k["right_ankle"] = {project(cam, Vec3(0.1, 0, 5)), 1.0};
    k["neck"] = {project(cam, Vec3(0, 0.86 * h, 5)), 1.0};
    k["head"] = {project(cam, Vec3(0, h, 5)), 1.0};
    return Pose{0, k};
  };
  for (const auto& [h, keep] : std::vector<std::pair<double, bool>>{{1.8, true}, {2.4, true}, {4.0, false}, {0.6, false}}) {
    const Pose p = pose_of_height(h);
    std::size_t dropped = 0;
    const auto out = refine_boxes({}, std::span(&p, 1), cam.image_size, &cam, {}, &dropped);
    EXPECT_EQ(out.size(), keep ? 1u : 0u) << "height " << h;
    EXPECT_EQ(dropped, keep ? 0u : 1u);
    EXPECT_EQ(refine_boxes({}, std::span(&p, 1), cam.image_size).size(), 1u);
  }
}

TEST(MergeTracks, PaperThresholds) {
  const auto tracks_for = [](double dist, int gap) {
    const std::vector<Detection> d = {neck_detection(0, Vec2(100, 100)), neck_detection(gap, Vec2(100 + dist, 100))};
    return merge_tracks(d).size();
  };
  EXPECT_EQ(tracks_for(30, 5), 1u);
  EXPECT_EQ(tracks_for(60, 5), 2u);
  EXPECT_EQ(tracks_for(49.9, 10), 1u);
  EXPECT_EQ(tracks_for(50.1, 10), 2u);
  EXPECT_EQ(tracks_for(50.0, 10), 2u);
  EXPECT_EQ(tracks_for(49.9, 11), 2u);
  EXPECT_EQ(tracks_for(0.0, 0), 2u);
}

TEST(MergeTracks, ChainsAndClosestWins) {
  // A ends at frame 0; B and C both start at frame 2, B closer.
  const std::vector<Detection> d = {neck_detection(0, Vec2(100, 100)), neck_detection(2, Vec2(130, 100)),
                                    neck_detection(2, Vec2(110, 100)), neck_detection(4, Vec2(115, 100))};
  const auto tracks = merge_tracks(d);
  ASSERT_EQ(tracks.size(), 2u);
  EXPECT_EQ(tracks[0].detections.size(), 3u);
  EXPECT_EQ(tracks[0].detections[1].keypoints.at("neck").position, Vec2(110, 100));
  EXPECT_EQ(tracks[1].detections.size(), 1u);
  for (const Track& t : tracks) {
    for (const Detection& det : t.detections) EXPECT_EQ(det.player_id, t.id);
  }
}

TEST(MergeTracks, MissingNeckFails) {
  Detection d = neck_detection(3, Vec2(1, 1));
  d.keypoints.clear();
  try {
    merge_tracks(std::span(&d, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedDetection);
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
}

std::vector<Detection> fuzzed_detections(std::mt19937_64& rng) {
  std::vector<Detection> d;
  const int n = static_cast<int>(uniform(rng, 0, 40));
  for (int i = 0; i < n; ++i) {
    d.push_back(neck_detection(static_cast<int>(uniform(rng, 0, 25)), Vec2(std::round(uniform(rng, 0, 300)), std::round(uniform(rng, 0, 200)))));
  }
  return d;
}

std::string signature(const std::vector<Track>& tracks) {
  return nlohmann::json(tracks).dump();
}

TEST(MergeTracks, FuzzedInvariants) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    std::vector<Detection> d = fuzzed_detections(rng);
    const auto tracks = merge_tracks(d);
    std::multiset<std::string> in, out;
    for (const Detection& det : d) in.insert(nlohmann::json(neck_detection(det.frame, det.keypoints.at("neck").position)).dump());
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      EXPECT_EQ(tracks[t].id, static_cast<int>(t));
      ASSERT_FALSE(tracks[t].detections.empty());
      for (std::size_t k = 1; k < tracks[t].detections.size(); ++k) {
        EXPECT_LT(tracks[t].detections[k - 1].frame, tracks[t].detections[k].frame);
      }
      for (const Detection& det : tracks[t].detections) {
        out.insert(nlohmann::json(neck_detection(det.frame, det.keypoints.at("neck").position)).dump());
      }
    }
    EXPECT_EQ(in, out);
    EXPECT_EQ(signature(merge_tracks(d)), signature(tracks));
    std::shuffle(d.begin(), d.end(), rng);
    EXPECT_EQ(signature(merge_tracks(d)), signature(tracks));
    std::vector<Detection> flat;
    for (const Track& t : tracks) flat.insert(flat.end(), t.detections.begin(), t.detections.end());
    EXPECT_EQ(signature(merge_tracks(flat)), signature(tracks));
  }
}

TEST(GroundContact, AnkleMidpointOrBoxBottom) {
  Detection d;
  d.bbox = PixelBox{10, 20, 30, 100};
  EXPECT_EQ(ground_contact(d), Vec2(25, 120));
  d.keypoints["left_ankle"] = {Vec2(20, 110), 0.9};
  d.keypoints["right_ankle"] = {Vec2(30, 114), 0.9};
  EXPECT_EQ(ground_contact(d), Vec2(25, 112));
  d.keypoints["right_ankle"].confidence = 0.2;
  EXPECT_EQ(ground_contact(d), Vec2(25, 120));
}

TEST(Skeleton, BonesNeedConfidentEndpoints) {
  Keypoints k = stick_figure(Vec2(50, 50));
  const auto all = detection_bones(k);
  EXPECT_FALSE(all.empty());
  k["neck"].confidence = 0.05;
  for (const auto& b : detection_bones(k)) {
    EXPECT_NE(b[0], Vec2(50, 50));
    EXPECT_NE(b[1], Vec2(50, 50));
  }
  EXPECT_EQ(skeleton_bones().size(), 13u);
}

TEST(TrackingJson, RoundTrips) {
  const auto j = nlohmann::json::parse(R"({"frame":3,"bbox":[1,2,3,4],"keypoints":{"neck":[5,6,0.5]}})");
  const Detection d = j.get<Detection>();
  EXPECT_EQ(d.frame, 3);
  EXPECT_EQ(d.bbox.height, 4.0);
  EXPECT_EQ(d.keypoints.at("neck").position, Vec2(5, 6));
  EXPECT_FALSE(d.player_id.has_value());
  EXPECT_EQ(nlohmann::json(d), j);
  const auto tracks = merge_tracks(std::vector<Detection>{d, neck_detection(5, Vec2(6, 6))});
  EXPECT_EQ(signature(nlohmann::json(tracks).get<std::vector<Track>>()), signature(tracks));
  EXPECT_THROW(nlohmann::json::parse(R"({"frame":0,"bbox":[0,0,1],"keypoints":{}})").get<Detection>(), Error);
  Detection empty_box = neck_detection(0, Vec2(1, 1));
  empty_box.bbox.width = -1.0;
  EXPECT_THROW(merge_tracks(std::span(&empty_box, 1)), Error);
}

}  // namespace
}  // namespace soccer3d

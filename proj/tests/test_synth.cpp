#include <gtest/gtest.h>

#include <cmath>

#include "xmloc/synth/dataset.hpp"
#include "xmloc/synth/lidar.hpp"
#include "xmloc/synth/scene.hpp"
#include "xmloc/synth/town.hpp"

using namespace xmloc;
using namespace xmloc::synth;

namespace {

TownParams small_town() {
  TownParams p;
  p.world_size = 400.0;
  return p;
}

}  // namespace

TEST(Town, DeterministicPerSeed) {
  EXPECT_EQ(generate_town(5, small_town()), generate_town(5, small_town()));
}

TEST(Town, SeedsDiffer) {
  const TownMap a = generate_town(1, small_town()), b = generate_town(2, small_town());
  std::size_t hamming = 0;
  for (int r = 0; r < a.cells(); ++r)
    for (int c = 0; c < a.cells(); ++c) hamming += a.occupied(r, c) != b.occupied(r, c);
  EXPECT_GT(hamming, 0u);
}

TEST(Town, ZeroDensityHasNoBuildings) {
  TownParams p = small_town();
  p.building_density = 0.0;
  const TownMap t = generate_town(3, p);
  EXPECT_EQ(t.count(Surface::Building), 0u);
  EXPECT_GT(t.count(Surface::Road), 0u);
}

TEST(Town, HasRoadsAndBuildings) {
  const TownMap t = generate_town(0, small_town());
  EXPECT_FALSE(t.road_u.empty());
  EXPECT_FALSE(t.road_v.empty());
  EXPECT_GT(t.count(Surface::Building), 0u);
  EXPECT_EQ(t.dynamic_objects.size(), 80u);
}

TEST(Town, DegenerateParamsRejected) {
  TownParams p;
  p.road_width = p.road_pitch + 1;
  EXPECT_THROW(generate_town(0, p), InvalidArgument);
  p = TownParams{};
  p.building_density = 1.5;
  EXPECT_THROW(generate_town(0, p), InvalidArgument);
  p = TownParams{};
  p.max_height = 1.0;
  EXPECT_THROW(generate_town(0, p), InvalidArgument);
}

TEST(Lidar, EmptyTownGivesMaxRangeGround) {
  const TownMap town(800, 0.5);
  LidarParams lp;
  lp.n_azimuth = 90;
  const PointCloud c = simulate_lidar(town, {200, 200, 0.3}, lp);
  ASSERT_EQ(c.size(), 90u);
  for (const auto& p : c.points()) {
    EXPECT_NEAR(std::hypot(p.x, p.y), 100.0, 1e-9);
    EXPECT_EQ(p.z, -lp.sensor_height);
  }
}

TEST(Lidar, WallAheadAtSensorOffset) {
  TownMap town(800, 0.5);
  town.fill_rect(110.0, 0.0, 120.0, 400.0, Surface::Building, 10.0f);
  LidarParams lp;
  lp.range_noise = 0.0;
  const PointCloud c = simulate_lidar(town, {100.0, 200.0, 0.0}, lp);
  std::size_t wall = 0;
  for (const auto& p : c.points()) {
    if (std::hypot(p.x, p.y) > 99.0 || p.x <= 0.0) continue;
    EXPECT_NEAR(p.x, 10.0 - 1.3, 1e-9);
    ++wall;
  }
  EXPECT_GT(wall, 0u);
  // The forward ray sees the wall up to the top of the vertical field of view.
  double top = -1e9;
  for (const auto& p : c.points())
    if (std::abs(p.y) < 1e-9 && p.x > 0) top = std::max(top, p.z);
  const double visible = std::min(10.0, lp.sensor_height + 8.7 * std::tan(deg_to_rad(lp.vfov_up_deg)));
  EXPECT_NEAR(top, visible - lp.sensor_height, 1e-9);
}

TEST(Lidar, EgoInsideBuildingRejected) {
  TownMap town(100, 0.5);
  town.fill_rect(10, 10, 20, 20, Surface::Building, 5.0f);
  EXPECT_THROW(simulate_lidar(town, {15, 15, 0}, LidarParams{}), InvalidPose);
}

TEST(Lidar, SeededNoiseIsDeterministic) {
  const TownMap town = generate_town(4, small_town());
  AugmentationParams aug;
  const Scene s = render_scene(town, 9, aug, small_town());
  LidarParams lp;
  lp.seed = 17;
  EXPECT_EQ(simulate_lidar(town, s.ego, lp), simulate_lidar(town, s.ego, lp));
}

TEST(Scene, IdentityAugmentationCentersPose) {
  AugmentationParams aug;
  aug.max_offset = 0.0;
  aug.rotation_range = 0.0;
  const Scene s = generate_scene(12, small_town(), aug);
  EXPECT_NEAR(s.gt_pose.u(), 32.0, 1e-9);
  EXPECT_NEAR(s.gt_pose.v(), 32.0, 1e-9);
  EXPECT_NEAR(s.gt_pose.theta(), s.ego.heading, 1e-12);
  EXPECT_EQ(s.gt_scale, 1.0);
  EXPECT_DOUBLE_EQ(s.meters_per_pixel, 0.5);  // one map cell = one 2 m pillar
  EXPECT_EQ(s.patch.size(), 256);
  EXPECT_EQ(s.gt_skeleton.height(), 64);
}

TEST(Scene, ScaleTwoDoublesGroundExtent) {
  AugmentationParams aug;
  aug.scale_choices = {2.0};
  const Scene s = generate_scene(12, small_town(), aug);
  EXPECT_EQ(s.gt_scale, 2.0);
  EXPECT_DOUBLE_EQ(s.meters_per_pixel * s.aug.patch_size, 2.0 * 128.0);
}

TEST(Scene, GroundTruthPoseMatchesProvenance) {
  AugmentationParams aug;
  aug.scale_choices = {1.5};
  const Scene s = generate_scene(21, small_town(), aug);
  const WorldPose sensor = sensor_pose(s.ego, aug.lidar);
  const Vec2 w = patch_to_world(s, s.gt_pose.u() * aug.stride, s.gt_pose.v() * aug.stride);
  EXPECT_NEAR(w.x, sensor.u, 1e-9);
  EXPECT_NEAR(w.y, sensor.v, 1e-9);
  EXPECT_NEAR(wrap_angle(s.gt_pose.theta() + s.patch_rotation - sensor.heading), 0.0, 1e-12);
}

TEST(Scene, DeterministicAndWorkerIndependent) {
  AugmentationParams aug;
  aug.time_lag = true;
  const auto a = generate_scenes(7, 4, small_town(), aug, 2, 1);
  const auto b = generate_scenes(7, 4, small_town(), aug, 2, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].scan, b[i].scan);
    EXPECT_EQ(a[i].patch_image, b[i].patch_image);
    EXPECT_EQ(a[i].gt_pose, b[i].gt_pose);
    const Scene one = generate_scene(7 + i, small_town(), aug, 2);
    EXPECT_EQ(one.scan, a[i].scan);
    EXPECT_EQ(one.town_seed, a[i].town_seed);
  }
  EXPECT_EQ(a[0].town_seed, 3u);
  EXPECT_EQ(a[1].town_seed, 4u);
}

TEST(Scene, InvalidAugmentationRejected) {
  AugmentationParams aug;
  aug.max_offset = 1.0;
  EXPECT_THROW(generate_scene(0, small_town(), aug), InvalidArgument);
  aug = AugmentationParams{};
  aug.scale_choices = {20.0};
  EXPECT_THROW(generate_scene(0, small_town(), aug), InvalidArgument);
  aug = AugmentationParams{};
  aug.stride = 3;
  EXPECT_THROW(generate_scene(0, small_town(), aug), InvalidArgument);
}

TEST(Scene, SkeletonMarksScanHits) {
  const Scene s = generate_scene(3, small_town(), AugmentationParams{});
  double on = 0;
  for (double v : s.gt_skeleton.values()) on += v;
  EXPECT_GT(on, 10.0);
}

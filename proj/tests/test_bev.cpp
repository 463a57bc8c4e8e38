#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "xmloc/bev/encoder.hpp"
#include "xmloc/bev/voxelize.hpp"
#include "xmloc/match/rotate.hpp"

using namespace xmloc;

TEST(Voxelize, OriginLandsInCenterPillar) {
  const PillarGrid g = voxelize(PointCloud({{0, 0, 0}}), VoxelConfig{}, 0);
  ASSERT_EQ(g.height(), 100);
  ASSERT_EQ(g.width(), 100);
  EXPECT_EQ(g.occupied(), 1u);
  EXPECT_EQ(g.pillar(50, 50).size(), 1u);
}

TEST(Voxelize, AxisConvention) {
  // +x runs along columns, +y toward row 0.
  const PillarGrid g = voxelize(PointCloud({{10.5, 0.5, 0}, {0.5, 10.5, 0}}), VoxelConfig{}, 0);
  EXPECT_EQ(g.pillar(49, 55).size(), 1u);
  EXPECT_EQ(g.pillar(44, 50).size(), 1u);
}

TEST(Voxelize, CapsPillarAt128) {
  std::vector<Point3> pts(200, Point3{1.0, 1.0, 0.0});
  for (int i = 0; i < 200; ++i) pts[i].z = i * 0.01;
  const PillarGrid g = voxelize(PointCloud(pts), VoxelConfig{}, 7);
  EXPECT_EQ(g.total_points(), 128u);
  // Kept points remain in their original order.
  const auto& kept = g.pillar(49, 50);
  ASSERT_EQ(kept.size(), 128u);
  for (std::size_t i = 1; i < kept.size(); ++i) EXPECT_LT(kept[i - 1].z, kept[i].z);
  EXPECT_EQ(voxelize(PointCloud(pts), VoxelConfig{}, 7), g);
}

TEST(Voxelize, DropsOutOfRange) {
  const PillarGrid g = voxelize(PointCloud({{150, 0, 0}, {0, 0, 25}}), VoxelConfig{}, 0);
  EXPECT_EQ(g.total_points(), 0u);
  EXPECT_EQ(g.occupied(), 0u);
}

TEST(Voxelize, EmptyCloudIsValid) {
  const PillarGrid g = voxelize(PointCloud{}, VoxelConfig{}, 0);
  EXPECT_EQ(g.occupied(), 0u);
  EXPECT_EQ(g.height(), 100);
}

TEST(VoxelConfig, Validation) {
  VoxelConfig v;
  v.dx = 3.0;  // 200 / 3 is not whole
  EXPECT_THROW(v.validate(), InvalidArgument);
  v = VoxelConfig{};
  v.max_points_per_voxel = 0;
  EXPECT_THROW(v.validate(), InvalidArgument);
  v = VoxelConfig{};
  v.range_x = {5, 5};
  EXPECT_THROW(v.validate(), InvalidArgument);
}

TEST(EncodeBev, RequiresEightChannels) {
  EXPECT_THROW(encode_bev(voxelize(PointCloud{}, VoxelConfig{}, 0), 7), InvalidArgument);
}

TEST(EncodeBev, EmptyGridIsZero) {
  const Grid2D f = encode_bev(voxelize(PointCloud{}, VoxelConfig{}, 0));
  EXPECT_EQ(f.channels(), 8);
  for (double v : f.values()) EXPECT_EQ(v, 0.0);
}

TEST(EncodeBev, SinglePillarStatistics) {
  const Grid2D f = encode_bev_raw(voxelize(PointCloud({{0.5, 0.5, 0.0}, {0.5, 0.5, 2.0}}), VoxelConfig{}, 0));
  EXPECT_DOUBLE_EQ(f.at(49, 50, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.at(49, 50, 1), std::log(3.0));
  EXPECT_DOUBLE_EQ(f.at(49, 50, 2), 0.0);
  EXPECT_DOUBLE_EQ(f.at(49, 50, 3), 2.0);
  EXPECT_DOUBLE_EQ(f.at(49, 50, 4), 1.0);
  EXPECT_DOUBLE_EQ(f.at(49, 50, 5), 2.0);
  EXPECT_EQ(f.at(49, 50, 7), 0.0);
}

TEST(EncodeBev, StandardizesOccupiedCells) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-90, 90), z(-2, 10);
  std::vector<Point3> pts;
  for (int i = 0; i < 3000; ++i) pts.push_back({u(rng), u(rng), z(rng)});
  const Grid2D f = encode_bev(voxelize(PointCloud(pts), VoxelConfig{}, 0));
  for (int ch : {1, 3, 4}) {
    double n = 0, sum = 0, sum2 = 0;
    for (std::size_t i = 0; i < f.cells(); ++i) {
      if (f.values()[i * 8] < 0.5) continue;
      const double v = f.values()[i * 8 + ch];
      sum += v;
      sum2 += v * v;
      n += 1;
    }
    EXPECT_NEAR(sum / n, 0.0, 1e-9);
    EXPECT_NEAR(sum2 / n, 1.0, 1e-9);
  }
}

TEST(EncodeBev, CentrallySymmetricCloudGivesSymmetricGrid) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> cell(-40, 39);
  std::uniform_real_distribution<double> jitter(0.2, 1.8), z(-2, 8);
  std::vector<Point3> pts;
  for (int i = 0; i < 500; ++i) {
    const double x = 2.0 * cell(rng) + jitter(rng);
    const double y = 2.0 * cell(rng) + jitter(rng);
    const double h = z(rng);
    pts.push_back({x, y, h});
    pts.push_back({-x, -y, h});
  }
  const Grid2D f = encode_bev(voxelize(PointCloud(pts), VoxelConfig{}, 0));
  const Grid2D r = rotate_feature(f, kPi);
  ASSERT_TRUE(f.same_shape(r));
  for (std::size_t i = 0; i < f.size(); ++i) ASSERT_NEAR(f.values()[i], r.values()[i], 1e-12) << i;
}

namespace {

Grid2D occupancy_grid(int n, const std::vector<std::pair<int, int>>& cells) {
  Grid2D f(n, n, 8);
  for (auto [r, c] : cells) f.at(r, c, 0) = 1.0;
  return f;
}

}  // namespace

TEST(BevSkeleton, EmptyOccupancyIsEpsilon) {
  const SkeletonMask s = bev_skeleton(Grid2D(20, 20, 8));
  for (std::size_t i = 0; i < s.cells(); ++i) EXPECT_DOUBLE_EQ(s.values()[2 * i + 1], kSkeletonEps);
}

TEST(BevSkeleton, ThinLineIsFixpoint) {
  std::vector<std::pair<int, int>> line;
  for (int c = 3; c < 17; ++c) line.push_back({10, c});
  const SkeletonMask s = bev_skeleton(occupancy_grid(20, line));
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) EXPECT_EQ(s.at(r, c, 1) > 0.5, r == 10 && c >= 3 && c < 17) << r << "," << c;
}

TEST(BevSkeleton, FilledSquareThinsAndIsIdempotent) {
  std::vector<std::pair<int, int>> sq;
  for (int r = 5; r < 14; ++r)
    for (int c = 5; c < 14; ++c) sq.push_back({r, c});
  const BinaryMask once = zhang_suen_thin(occupancy_mask(occupancy_grid(20, sq)));
  EXPECT_GT(once.count(), 0u);
  EXPECT_LT(once.count(), 81u);
  EXPECT_EQ(zhang_suen_thin(once), once);
}

TEST(BevStructureSkeleton, IgnoresFlatGround) {
  // Flat returns everywhere except a wall of tall pillars along one row.
  std::vector<Point3> pts;
  for (int i = -20; i < 20; ++i)
    for (int j = -20; j < 20; ++j) pts.push_back({2.0 * i + 1.0, 2.0 * j + 1.0, -2.5});
  for (int i = -10; i < 10; ++i)
    for (double z : {-2.5, 0.0, 3.0}) pts.push_back({2.0 * i + 1.0, 21.0, z});
  const Grid2D raw = encode_bev_raw(voxelize(PointCloud(pts), VoxelConfig{}, 0));
  const SkeletonMask s = bev_structure_skeleton(raw, 0.5);
  std::size_t on = 0;
  for (int r = 0; r < s.height(); ++r)
    for (int c = 0; c < s.width(); ++c)
      if (s.at(r, c, 1) > 0.5) {
        ++on;
        EXPECT_EQ(r, 39);
      }
  EXPECT_EQ(on, 20u);
}

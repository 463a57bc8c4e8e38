#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <limits>

#include "test_support.hpp"
#include "xmloc/core/geometry.hpp"
#include "xmloc/core/grid.hpp"
#include "xmloc/core/parallel.hpp"
#include "xmloc/core/point_cloud.hpp"
#include "xmloc/io/checksum.hpp"

using namespace xmloc;

TEST(WrapAngle, KnownValues) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_NEAR(wrap_angle(1.5 * kPi), -0.5 * kPi, 1e-12);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
}

TEST(WrapAngle, RejectsNonFinite) {
  EXPECT_THROW(wrap_angle(std::numeric_limits<double>::quiet_NaN()), InvalidArgument);
  EXPECT_THROW(wrap_angle(std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST(WrapAngle, RangeProperty) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-100.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = d(rng);
    const double w = wrap_angle(t);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::remainder(w - t, 2.0 * kPi), 0.0, 1e-9);
  }
}

TEST(ApplyPose, Cases) {
  Vec2 p = apply_pose({0, 0}, Pose(10, 20, 1.234));
  EXPECT_NEAR(p.x, 10, 1e-12);
  EXPECT_NEAR(p.y, 20, 1e-12);
  p = apply_pose({1, 0}, Pose(0, 0, 0));
  EXPECT_NEAR(p.x, 1, 1e-12);
  EXPECT_NEAR(p.y, 0, 1e-12);
  p = apply_pose({1, 0}, Pose(0, 0, kPi / 2));
  EXPECT_NEAR(p.x, 0, 1e-12);
  EXPECT_NEAR(p.y, 1, 1e-12);
}

TEST(Pose, RejectsNonFinitePosition) {
  EXPECT_THROW(Pose(std::nan(""), 0, 0), InvalidArgument);
}

TEST(PoseError, Cases) {
  PoseError e = pose_error(Pose(3, 4, 0), Pose(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(e.loc_m, 5.0);
  EXPECT_DOUBLE_EQ(e.ori_deg, 0.0);
  e = pose_error(Pose(0, 0, deg_to_rad(179)), Pose(0, 0, deg_to_rad(-179)), 1.0);
  EXPECT_NEAR(e.loc_m, 0.0, 1e-12);
  EXPECT_NEAR(e.ori_deg, 2.0, 1e-9);
  e = pose_error(Pose(7, 8, 1), Pose(7, 8, 1), 2.0);
  EXPECT_EQ(e.loc_m, 0.0);
  EXPECT_EQ(e.ori_deg, 0.0);
  EXPECT_THROW(pose_error(Pose(), Pose(), 0.0), InvalidArgument);
}

TEST(Grid2D, ShapeAndAccess) {
  Grid2D g(3, 4, 2, 0.5);
  EXPECT_EQ(g.size(), 24u);
  g.at(2, 3, 1) = 7.0;
  EXPECT_EQ(g.values().back(), 7.0);
  EXPECT_EQ(g.channel(1).at(2, 3), 7.0);
  EXPECT_EQ(*g.cell_size(), 0.5);
  EXPECT_THROW(Grid2D(0, 4, 1), InvalidArgument);
  EXPECT_THROW(Grid2D(2, 2, 1, std::vector<double>(3)), InvalidArgument);
  EXPECT_THROW(Grid2D(1, 1, 1, std::vector<double>{std::nan("")}), InvalidArgument);
  EXPECT_THROW(g.channel(2), InvalidArgument);
}

TEST(SkeletonFromBinary, ClampsProbabilities) {
  const SkeletonMask m = skeleton_from_binary({1, 0}, 1, 2, std::nullopt);
  EXPECT_DOUBLE_EQ(m.at(0, 0, 1), 1.0 - kSkeletonEps);
  EXPECT_DOUBLE_EQ(m.at(0, 1, 1), kSkeletonEps);
  EXPECT_DOUBLE_EQ(m.at(0, 0, 0) + m.at(0, 0, 1), 1.0);
}

TEST(PointCloud, RejectsNonFinite) {
  EXPECT_THROW(PointCloud({{0, std::nan(""), 0}}), InvalidArgument);
}

TEST(PointCloud, BinaryRoundTrip) {
  test::TempDir dir;
  const PointCloud c({{1.5f, -2.25f, 3.0f}, {0, 0, 0}, {-99.5f, 12.125f, -2.5f}});
  write_point_cloud_bin(c, dir / "c.bin");
  EXPECT_EQ(std::filesystem::file_size(dir / "c.bin"), 36u);
  EXPECT_EQ(read_point_cloud(dir / "c.bin"), c);
}

TEST(PointCloud, CsvRoundTrip) {
  test::TempDir dir;
  const PointCloud c({{0.1, 0.2, 0.3}, {-5, 6, 7}});
  write_point_cloud_csv(c, dir / "c.csv");
  EXPECT_EQ(read_point_cloud(dir / "c.csv"), c);
}

TEST(PointCloud, MalformedInputs) {
  test::TempDir dir;
  test::write_text(dir / "bad.bin", "12345");
  EXPECT_THROW(read_point_cloud(dir / "bad.bin"), InputFormatError);
  test::write_text(dir / "bad.csv", "x,y,z\n1,2\n");
  EXPECT_THROW(read_point_cloud(dir / "bad.csv"), InputFormatError);
  test::write_text(dir / "hdr.csv", "a,b,c\n");
  EXPECT_THROW(read_point_cloud(dir / "hdr.csv"), InputFormatError);
  EXPECT_THROW(read_point_cloud(dir / "missing.bin"), InputFormatError);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](int, std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 3, [](int, std::size_t i) {
                 if (i == 42) throw InvalidArgument("boom");
               }),
               InvalidArgument);
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  test::TempDir dir;
  test::write_text(dir / "abc", "abc");
  EXPECT_EQ(sha256_file(dir / "abc"), sha256_hex("abc"));
}

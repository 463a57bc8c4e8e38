#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "xmloc/loss/losses.hpp"

using namespace xmloc;

namespace {

ProbabilityVolume uniform_volume(int n_rot, int h, int w) {
  return softmax_volume(ScoreVolume(n_rot, h, w));
}

// Volume with mass q at (i, a, b) and the rest spread evenly.
ProbabilityVolume concentrated(int n_rot, int h, int w, int i, int a, int b, double q) {
  ProbabilityVolume p = uniform_volume(n_rot, h, w);
  const double rest = (1.0 - q) / static_cast<double>(p.size() - 1);
  for (auto& x : p.probs) x = rest;
  p.probs[p.index(i, a, b)] = q;
  return p;
}

}  // namespace

TEST(PoseNll, UniformIsLogV) {
  const ProbabilityVolume p = uniform_volume(8, 6, 5);
  EXPECT_NEAR(pose_nll(p, Pose(2, 3, 0.3)), std::log(240.0), 1e-9);
}

TEST(PoseNll, OneHotAtGroundTruthIsZero) {
  ScoreVolume v(4, 5, 5);
  v.at(2, 1, 3) = 1e4;  // angle 0, row 1, col 3
  EXPECT_NEAR(pose_nll(softmax_volume(v), Pose(3, 1, 0)), 0.0, 1e-12);
  // Away from gt the floor bounds the loss.
  EXPECT_NEAR(pose_nll(softmax_volume(v), Pose(0, 0, 0)), -std::log(kProbabilityFloor), 1e-9);
}

TEST(PoseNll, DecreasesAsMassConcentrates) {
  const double expect[] = {2.302, 0.693, 0.105};
  double prev = 1e9;
  int k = 0;
  for (double q : {0.1, 0.5, 0.9}) {
    const double nll = pose_nll(concentrated(4, 4, 4, 2, 1, 2, q), Pose(2, 1, 0));
    EXPECT_NEAR(nll, expect[k++], 1e-3);
    EXPECT_LT(nll, prev);
    prev = nll;
  }
}

TEST(PoseNll, SnapsToNearestBin) {
  const ProbabilityVolume p = concentrated(8, 4, 4, 4, 2, 1, 0.9);  // angle 0
  EXPECT_NEAR(pose_nll(p, Pose(1.3, 1.6, 0.2)), -std::log(0.9), 1e-12);
  EXPECT_EQ(nearest_rotation_bin(kPi, 8), 0);
  EXPECT_EQ(nearest_rotation_bin(-kPi + 0.1, 8), 0);
}

TEST(PoseNll, Errors) {
  const ProbabilityVolume p = uniform_volume(2, 4, 4);
  EXPECT_THROW(pose_nll(p, Pose(4.2, 0, 0)), InvalidArgument);
  EXPECT_THROW(pose_nll(p, Pose(0, -1, 0)), InvalidArgument);
  EXPECT_THROW(pose_nll(std::vector<ProbabilityVolume>{p}, {}), InvalidArgument);
}

TEST(PoseNll, BatchIsMean) {
  const ProbabilityVolume a = concentrated(4, 4, 4, 2, 1, 1, 0.5), b = concentrated(4, 4, 4, 2, 1, 1, 0.9);
  const Pose gt(1, 1, 0);
  EXPECT_NEAR(pose_nll({a, b}, {gt, gt}), 0.5 * (pose_nll(a, gt) + pose_nll(b, gt)), 1e-12);
}

TEST(ScaleLoss, Cases) {
  EXPECT_EQ(scale_loss({1.5, 2.0}, {1.5, 2.0}), 0.0);
  EXPECT_EQ(scale_loss({2}, {1}), 1.0);
  EXPECT_EQ(scale_loss({1, 3}, {0, 0}), 5.0);
  EXPECT_THROW(scale_loss({1, 2}, {1}), InvalidArgument);
  EXPECT_THROW(scale_loss({}, {}), InvalidArgument);
}

namespace {

SkeletonMask constant_prediction(int n, double q) {
  SkeletonMask m(n, n, 2);
  for (std::size_t i = 0; i < m.cells(); ++i) {
    m.values()[2 * i + 1] = q;
    m.values()[2 * i] = 1.0 - q;
  }
  return m;
}

Grid2D ones(int n) {
  Grid2D g(n, n, 1);
  std::fill(g.values().begin(), g.values().end(), 1.0);
  return g;
}

}  // namespace

TEST(SkeletonBce, ExactPredictionHitsClampFloor) {
  Grid2D gt(4, 4, 1);
  gt.at(1, 1) = 1.0;
  SkeletonMask pred(4, 4, 2);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      pred.at(r, c, 1) = gt.at(r, c);
      pred.at(r, c, 0) = 1.0 - gt.at(r, c);
    }
  EXPECT_NEAR(skeleton_bce(pred, gt, ones(4)), -std::log(1.0 - 1e-4), 1e-12);
}

TEST(SkeletonBce, HalfIsLogTwo) {
  Grid2D gt(5, 5, 1);
  gt.at(2, 3) = 1.0;
  EXPECT_NEAR(skeleton_bce(constant_prediction(5, 0.5), gt, ones(5)), std::log(2.0), 1e-9);
}

TEST(SkeletonBce, CoverageMasksCells) {
  // Loss over a covered sub-window equals the loss of that window alone.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 8;
  SkeletonMask pred(n, n, 2);
  Grid2D gt(n, n, 1), cov(n, n, 1);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      pred.at(r, c, 1) = u(rng);
      pred.at(r, c, 0) = 1.0 - pred.at(r, c, 1);
      gt.at(r, c) = u(rng) < 0.3 ? 1.0 : 0.0;
      cov.at(r, c) = (r >= 2 && r < 5 && c >= 1 && c < 7) ? 1.0 : 0.0;
    }
  SkeletonMask sub_pred(3, 6, 2);
  Grid2D sub_gt(3, 6, 1);
  Grid2D sub_cov(3, 6, 1);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 6; ++c) {
      sub_pred.at(r, c, 0) = pred.at(r + 2, c + 1, 0);
      sub_pred.at(r, c, 1) = pred.at(r + 2, c + 1, 1);
      sub_gt.at(r, c) = gt.at(r + 2, c + 1);
      sub_cov.at(r, c) = 1.0;
    }
  EXPECT_NEAR(skeleton_bce(pred, gt, cov), skeleton_bce(sub_pred, sub_gt, sub_cov), 1e-12);
}

TEST(SkeletonBce, Errors) {
  EXPECT_THROW(skeleton_bce(constant_prediction(4, 0.5), Grid2D(4, 4, 1), Grid2D(4, 4, 1)), InvalidArgument);
  EXPECT_THROW(skeleton_bce(constant_prediction(4, 0.5), Grid2D(3, 4, 1), ones(4)), InvalidArgument);
  EXPECT_THROW(skeleton_bce(Grid2D(4, 4, 1), Grid2D(4, 4, 1), ones(4)), InvalidArgument);
}

TEST(LossReport, TotalIsSum) {
  const LossReport r = make_loss_report(1.0, 2.0, 0.5);
  EXPECT_EQ(r.total, 3.5);
}

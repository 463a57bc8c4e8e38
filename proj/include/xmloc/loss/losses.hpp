#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/geometry.hpp"
#include "xmloc/core/grid.hpp"
#include "xmloc/match/probability.hpp"

namespace xmloc {

inline constexpr double kProbabilityFloor = 1e-30;
inline constexpr double kBceClamp = 1e-4;

struct LossReport {
  double nll = 0.0;
  double scale_mse = 0.0;
  double skeleton_bce = 0.0;
  double total = 0.0;
};

inline LossReport make_loss_report(double nll, double scale_mse, double skeleton_bce) {
  return {nll, scale_mse, skeleton_bce, nll + scale_mse + skeleton_bce};
}

// Nearest rotation bin of angle theta for bins at -pi + 2*pi*i/n.
inline int nearest_rotation_bin(double theta, int n_rot) {
  if (n_rot < 1) throw InvalidArgument("nearest_rotation_bin: n_rot must be >= 1");
  const double step = 2.0 * kPi / n_rot;
  const long k = std::lround((wrap_angle(theta) + kPi) / step);
  return static_cast<int>(((k % n_rot) + n_rot) % n_rot);
}

/// -log P at the ground-truth pose, snapped to the nearest cell and rotation
/// bin. Probabilities are floored at `floor`.
inline double pose_nll(const ProbabilityVolume& p, const Pose& gt, double floor = kProbabilityFloor) {
  if (p.probs.empty()) throw InvalidArgument("pose_nll: empty probability volume");
  const long a = std::lround(gt.v());
  const long b = std::lround(gt.u());
  if (a < 0 || a >= p.height || b < 0 || b >= p.width)
    throw InvalidArgument("pose_nll: ground-truth pose outside the volume");
  const int i = nearest_rotation_bin(gt.theta(), p.n_rot);
  return -std::log(std::max(p.at(i, static_cast<int>(a), static_cast<int>(b)), floor));
}

// Batch mean of pose_nll.
inline double pose_nll(const std::vector<ProbabilityVolume>& ps, const std::vector<Pose>& gts,
                       double floor = kProbabilityFloor) {
  if (ps.empty() || ps.size() != gts.size()) throw InvalidArgument("pose_nll: batch sizes differ or are empty");
  double sum = 0.0;
  for (std::size_t k = 0; k < ps.size(); ++k) sum += pose_nll(ps[k], gts[k], floor);
  return sum / static_cast<double>(ps.size());
}

inline double scale_loss(const std::vector<double>& pred, const std::vector<double>& gt) {
  if (pred.size() != gt.size()) throw InvalidArgument("scale_loss: length mismatch");
  if (pred.empty()) throw InvalidArgument("scale_loss: empty batch");
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = pred[k] - gt[k];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

/// Binary cross entropy of skeleton channel 1 against `gt`, averaged over the
/// cells where `coverage` is set. gt and coverage are single-channel 0/1 grids.
inline double skeleton_bce(const SkeletonMask& pred, const Grid2D& gt, const Grid2D& coverage,
                           double clamp = kBceClamp) {
  if (pred.channels() != 2) throw InvalidArgument("skeleton_bce: prediction must have two channels");
  if (pred.height() != gt.height() || pred.width() != gt.width() || pred.height() != coverage.height() ||
      pred.width() != coverage.width())
    throw InvalidArgument("skeleton_bce: spatial dimensions differ");
  double sum = 0.0;
  std::size_t n = 0;
  for (int r = 0; r < pred.height(); ++r)
    for (int c = 0; c < pred.width(); ++c) {
      if (coverage.at(r, c, 0) <= 0.5) continue;
      const double q = std::clamp(pred.at(r, c, 1), clamp, 1.0 - clamp);
      const double y = gt.at(r, c, 0) > 0.5 ? 1.0 : 0.0;
      sum += -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
      ++n;
    }
  if (n == 0) throw InvalidArgument("skeleton_bce: empty coverage");
  return sum / static_cast<double>(n);
}

}  // namespace xmloc

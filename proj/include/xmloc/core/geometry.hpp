#pragma once

#include <cmath>
#include <numbers>

#include "xmloc/core/error.hpp"

namespace xmloc {

inline constexpr double kPi = std::numbers::pi;

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double theta) {
  if (!std::isfinite(theta)) throw InvalidArgument("wrap_angle: non-finite angle");
  double r = std::remainder(theta, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Planar pose in map-grid coordinates.
///
/// u runs along grid columns, v along grid rows, both in cells. Positions use
/// cell-edge coordinates: cell (row r, col c) spans [c, c+1) x [r, r+1).
/// theta is the heading in the (u, v) plane, counterclockwise positive, with
/// the heading direction (cos theta, sin theta). It is always kept in (-pi, pi].
class Pose {
 public:
  Pose() = default;
  Pose(double u, double v, double theta) : u_(u), v_(v), theta_(wrap_angle(theta)) {
    if (!std::isfinite(u) || !std::isfinite(v)) throw InvalidArgument("Pose: non-finite position");
  }

  double u() const { return u_; }
  double v() const { return v_; }
  double theta() const { return theta_; }

  Pose translated(double du, double dv) const { return {u_ + du, v_ + dv, theta_}; }
  Pose rotated(double dtheta) const { return {u_, v_, theta_ + dtheta}; }

  friend bool operator==(const Pose&, const Pose&) = default;

 private:
  double u_ = 0.0;
  double v_ = 0.0;
  double theta_ = 0.0;
};

// Maps a point given in BEV cells relative to the BEV grid center
// (x along columns, y along rows) into map-grid coordinates.
inline Vec2 apply_pose(Vec2 p, const Pose& pose) {
  const double c = std::cos(pose.theta());
  const double s = std::sin(pose.theta());
  return {c * p.x - s * p.y + pose.u(), s * p.x + c * p.y + pose.v()};
}

struct PoseError {
  double loc_m = 0.0;
  double ori_deg = 0.0;
};

inline PoseError pose_error(const Pose& pred, const Pose& gt, double cell_size) {
  if (!(cell_size > 0.0)) throw InvalidArgument("pose_error: cell_size must be positive");
  const double du = pred.u() - gt.u();
  const double dv = pred.v() - gt.v();
  return {cell_size * std::hypot(du, dv),
          rad_to_deg(std::abs(wrap_angle(pred.theta() - gt.theta())))};
}

}  // namespace xmloc

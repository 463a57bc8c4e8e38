#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/geometry.hpp"
#include "xmloc/core/point_cloud.hpp"
#include "xmloc/synth/town.hpp"

namespace xmloc::synth {

// Vehicle pose in world meters; heading direction (cos h, sin h) in (u, v).
struct WorldPose {
  double u = 0.0;
  double v = 0.0;
  double heading = 0.0;

  friend bool operator==(const WorldPose&, const WorldPose&) = default;
};

// Sensor mounted 1.3 m ahead of the vehicle center and 2.5 m above ground.
struct LidarParams {
  int n_azimuth = 720;
  double max_range = 100.0;
  double sensor_forward = 1.3;
  double sensor_height = 2.5;
  int elevation_samples = 8;
  double vfov_up_deg = 15.0;
  double range_noise = 0.03;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_azimuth < 1 || elevation_samples < 1 || !(max_range > 0.0) || !(range_noise >= 0.0) ||
        !(sensor_height > 0.0))
      throw InvalidArgument("LidarParams: invalid parameters");
  }
};

inline WorldPose sensor_pose(const WorldPose& ego, const LidarParams& p) {
  return {ego.u + p.sensor_forward * std::cos(ego.heading), ego.v + p.sensor_forward * std::sin(ego.heading),
          ego.heading};
}

// Sensor-frame (x forward, y left) offset to world meters.
inline Vec2 sensor_to_world(const WorldPose& sensor, double x, double y) {
  const double c = std::cos(sensor.heading), s = std::sin(sensor.heading);
  return {sensor.u + x * c + y * s, sensor.v + x * s - y * c};
}

namespace detail {

struct RayHit {
  double t = std::numeric_limits<double>::infinity();
  double height = 0.0;
};

// First occupied raster cell along the ray (Amanatides-Woo traversal).
inline RayHit cast_raster(const TownMap& town, double u0, double v0, double du, double dv, double max_t) {
  const double res = town.resolution();
  int c = static_cast<int>(std::floor(u0 / res));
  int r = static_cast<int>(std::floor(v0 / res));
  const int step_c = du > 0 ? 1 : -1;
  const int step_r = dv > 0 ? 1 : -1;
  const double inf = std::numeric_limits<double>::infinity();
  double t_max_u = du != 0.0 ? ((c + (du > 0 ? 1 : 0)) * res - u0) / du : inf;
  double t_max_v = dv != 0.0 ? ((r + (dv > 0 ? 1 : 0)) * res - v0) / dv : inf;
  const double t_delta_u = du != 0.0 ? res / std::abs(du) : inf;
  const double t_delta_v = dv != 0.0 ? res / std::abs(dv) : inf;
  for (;;) {
    double t;
    if (t_max_u < t_max_v) {
      t = t_max_u;
      c += step_c;
      t_max_u += t_delta_u;
    } else {
      t = t_max_v;
      r += step_r;
      t_max_v += t_delta_v;
    }
    if (t > max_t) return {};
    if (town.occupied(r, c)) return {t, town.height(r, c)};
  }
}

// Entry distance of a ray into an oriented box (2D slab test).
inline RayHit cast_box(const Box& b, double u0, double v0, double du, double dv) {
  const double c = std::cos(b.heading), s = std::sin(b.heading);
  const double ou = u0 - b.cu, ov = v0 - b.cv;
  const double o[2] = {c * ou + s * ov, -s * ou + c * ov};
  const double d[2] = {c * du + s * dv, -s * du + c * dv};
  const double half[2] = {0.5 * b.length, 0.5 * b.width};
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (std::abs(o[k]) > half[k]) return {};
      continue;
    }
    double a = (-half[k] - o[k]) / d[k];
    double bb = (half[k] - o[k]) / d[k];
    if (a > bb) std::swap(a, bb);
    t0 = std::max(t0, a);
    t1 = std::min(t1, bb);
  }
  if (t0 > t1 || t1 < 0.0 || t0 < 0.0) return {};
  return {t0, b.height};
}

}  // namespace detail

/// 2D ray-cast LiDAR in the sensor frame.
///
/// Each azimuth ray (0 = forward, counterclockwise towards +y) stops at the
/// first building cell or scan-side object within max_range and yields
/// elevation_samples wall points from the ground up to the visible top
/// (min(height, sensor_height + r tan(vfov_up))). Rays without a hit yield
/// one ground return at max_range with z = -sensor_height. Hit ranges carry
/// seeded Gaussian noise.
inline PointCloud simulate_lidar(const TownMap& town, const WorldPose& ego, const LidarParams& p,
                                 const std::vector<Box>& scan_objects = {}) {
  p.validate();
  if (town.occupied_at(ego.u, ego.v)) throw InvalidPose("simulate_lidar: ego inside a building");
  const WorldPose sensor = sensor_pose(ego, p);
  if (town.occupied_at(sensor.u, sensor.v)) throw InvalidPose("simulate_lidar: sensor inside a building");
  for (const auto& b : scan_objects)
    if (b.contains(sensor.u, sensor.v)) throw InvalidPose("simulate_lidar: sensor inside a dynamic object");

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, p.range_noise);
  const double tan_up = std::tan(deg_to_rad(p.vfov_up_deg));
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(p.n_azimuth) * p.elevation_samples);
  for (int k = 0; k < p.n_azimuth; ++k) {
    const double alpha = 2.0 * kPi * k / p.n_azimuth;
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const Vec2 dir{ca * std::cos(sensor.heading) + sa * std::sin(sensor.heading),
                   ca * std::sin(sensor.heading) - sa * std::cos(sensor.heading)};
    detail::RayHit hit = detail::cast_raster(town, sensor.u, sensor.v, dir.x, dir.y, p.max_range);
    for (const auto& b : scan_objects) {
      const auto bh = detail::cast_box(b, sensor.u, sensor.v, dir.x, dir.y);
      if (bh.t < hit.t && bh.t <= p.max_range) hit = bh;
    }
    if (!std::isfinite(hit.t)) {
      pts.push_back({p.max_range * ca, p.max_range * sa, -p.sensor_height});
      continue;
    }
    double r = hit.t;
    if (p.range_noise > 0.0) r = std::max(0.0, r + noise(rng));
    const double top = std::min(hit.height, p.sensor_height + r * tan_up);
    for (int j = 0; j < p.elevation_samples; ++j) {
      const double frac = p.elevation_samples == 1 ? 0.0 : static_cast<double>(j) / (p.elevation_samples - 1);
      pts.push_back({r * ca, r * sa, -p.sensor_height + frac * top});
    }
  }
  return PointCloud(std::move(pts));
}

}  // namespace xmloc::synth

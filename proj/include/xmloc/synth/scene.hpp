#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/geometry.hpp"
#include "xmloc/core/grid.hpp"
#include "xmloc/core/point_cloud.hpp"
#include "xmloc/image/image_io.hpp"
#include "xmloc/map/encoder.hpp"
#include "xmloc/synth/lidar.hpp"
#include "xmloc/synth/town.hpp"

namespace xmloc::synth {

/// Diversity axes applied when rendering a scene: patch scale, patch
/// orientation, patch center offset, time lag (dynamic objects present in
/// only one modality) and lighting (brightness/contrast jitter).
struct AugmentationParams {
  int patch_size = 256;
  int stride = 4;           // map-grid cell = stride patch pixels
  double bev_cell = 2.0;    // meters per BEV cell; scale 1 makes map cells this size
  double scale_min = 1.0;
  double scale_max = 1.0;
  std::vector<double> scale_choices;  // when non-empty, scale is drawn from these
  double max_offset = 0.25;           // fraction of the patch half-extent
  double rotation_range = kPi;        // patch rotation drawn from [-r, r]
  bool time_lag = false;
  int scan_cars = 8;
  double brightness_jitter = 0.1;
  double contrast_jitter = 0.2;
  double pixel_noise = 0.01;
  double heading_jitter_deg = 5.0;
  int skeleton_radius = 0;  // cells; 0 stamps single cells
  int max_retries = 64;
  LidarParams lidar{};

  void validate() const {
    if (patch_size <= 0 || stride <= 0 || patch_size % stride != 0)
      throw InvalidArgument("AugmentationParams: patch_size must be a positive multiple of stride");
    if (!(bev_cell > 0.0)) throw InvalidArgument("AugmentationParams: bev_cell must be positive");
    auto in_range = [](double s) { return s >= 0.5 && s <= 10.0; };
    if (scale_choices.empty()) {
      if (!(in_range(scale_min) && in_range(scale_max) && scale_min <= scale_max))
        throw InvalidArgument("AugmentationParams: scale range must lie within [0.5, 10]");
    } else {
      for (double s : scale_choices)
        if (!in_range(s)) throw InvalidArgument("AugmentationParams: scale choice outside [0.5, 10]");
    }
    if (!(max_offset >= 0.0 && max_offset < 1.0)) throw InvalidArgument("AugmentationParams: max_offset in [0, 1)");
    if (!(rotation_range >= 0.0)) throw InvalidArgument("AugmentationParams: rotation_range must be >= 0");
    if (!(contrast_jitter >= 0.0 && contrast_jitter < 1.0 && brightness_jitter >= 0.0 && pixel_noise >= 0.0))
      throw InvalidArgument("AugmentationParams: invalid lighting jitter");
    if (skeleton_radius < 0 || max_retries < 1 || scan_cars < 0)
      throw InvalidArgument("AugmentationParams: invalid counts");
    lidar.validate();
  }

  int grid_size() const { return patch_size / stride; }
};

// Render-time luminance of each surface class; roofs brighten with height.
struct Palette {
  double ground = 0.33;
  double road = 0.25;
  double roof_low = 0.55;
  double roof_high = 0.9;
  double car = 0.85;
};

struct Scene {
  PointCloud scan;
  Image8 patch_image;  // 8-bit gray, what is written as patch.png
  MapPatch patch;
  Pose gt_pose;        // sensor pose in map-grid cells of the patch
  double gt_scale = 1.0;  // map cell size / BEV cell size
  Grid2D gt_skeleton;     // binary, map-grid resolution
  std::uint64_t seed = 0;
  AugmentationParams aug;

  // Provenance, recorded in meta.json.
  std::uint64_t town_seed = 0;
  WorldPose ego;
  Vec2 patch_center;
  double patch_rotation = 0.0;
  double meters_per_pixel = 0.0;
};

// Patch pixel (edge coordinates) to world meters.
inline Vec2 patch_to_world(const Scene& s, double px, double py) {
  const double half = 0.5 * s.aug.patch_size;
  const double lx = (px - half) * s.meters_per_pixel, ly = (py - half) * s.meters_per_pixel;
  const double c = std::cos(s.patch_rotation), sn = std::sin(s.patch_rotation);
  return {s.patch_center.x + c * lx - sn * ly, s.patch_center.y + sn * lx + c * ly};
}

inline Vec2 world_to_patch(const Vec2& center, double rotation, double mpp, int patch_size, double u, double v) {
  const double du = u - center.x, dv = v - center.y;
  const double c = std::cos(rotation), s = std::sin(rotation);
  return {(c * du + s * dv) / mpp + 0.5 * patch_size, (-s * du + c * dv) / mpp + 0.5 * patch_size};
}

namespace detail {

inline float luminance_of(const TownMap& town, const Palette& pal, double u, double v, const TownParams* tp = nullptr) {
  int r, c;
  if (!town.cell_of(u, v, r, c)) return static_cast<float>(pal.ground);
  switch (town.surface(r, c)) {
    case Surface::Road:
      return static_cast<float>(pal.road);
    case Surface::Building: {
      const double lo = tp ? tp->min_height : 4.0, hi = tp ? tp->max_height : 30.0;
      const double f = hi > lo ? std::clamp((town.height(r, c) - lo) / (hi - lo), 0.0, 1.0) : 0.5;
      return static_cast<float>(pal.roof_low + f * (pal.roof_high - pal.roof_low));
    }
    default:
      return static_cast<float>(pal.ground);
  }
}

inline WorldPose sample_ego(const TownMap& town, std::mt19937_64& rng, const AugmentationParams& aug,
                            const TownParams& tp) {
  const double margin = 20.0;
  const double world = town.world_size();
  std::normal_distribution<double> jitter(0.0, deg_to_rad(aug.heading_jitter_deg));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const bool vertical = town.road_v.empty() || (!town.road_u.empty() && (rng() & 1u));
    const auto& lines = vertical ? town.road_u : town.road_v;
    if (lines.empty()) break;
    const double line = lines[rng() % lines.size()];
    const double lateral = uniform(rng, -0.3, 0.3) * tp.road_width;
    const double along = uniform(rng, margin, world - margin);
    const bool flip = rng() & 1u;
    WorldPose ego;
    ego.u = vertical ? line + lateral : along;
    ego.v = vertical ? along : line + lateral;
    ego.heading = wrap_angle((vertical ? kPi / 2.0 : 0.0) + (flip ? kPi : 0.0) + jitter(rng));
    const WorldPose sensor = sensor_pose(ego, aug.lidar);
    if (ego.u < margin || ego.u > world - margin || ego.v < margin || ego.v > world - margin) continue;
    if (town.occupied_at(ego.u, ego.v) || town.occupied_at(sensor.u, sensor.v)) continue;
    return ego;
  }
  throw InvalidPose("render_scene: no drivable ego position found");
}

inline std::vector<Box> sample_scan_cars(const TownMap& town, std::mt19937_64& rng, const WorldPose& sensor,
                                         int count, const TownParams& tp) {
  std::vector<Box> cars;
  for (int attempt = 0; attempt < 20 * count && static_cast<int>(cars.size()) < count; ++attempt) {
    const bool vertical = town.road_v.empty() || (!town.road_u.empty() && (rng() & 1u));
    const auto& lines = vertical ? town.road_u : town.road_v;
    if (lines.empty()) break;
    // Prefer roads near the sensor so the objects actually appear in the scan.
    std::vector<double> near;
    for (double l : lines)
      if (std::abs(l - (vertical ? sensor.u : sensor.v)) < 80.0) near.push_back(l);
    if (near.empty()) continue;
    Box car;
    const double line = near[rng() % near.size()];
    const double lateral = uniform(rng, -0.3, 0.3) * tp.road_width;
    const double along = (vertical ? sensor.v : sensor.u) + uniform(rng, -60.0, 60.0);
    car.cu = vertical ? line + lateral : along;
    car.cv = vertical ? along : line + lateral;
    car.heading = vertical ? kPi / 2.0 : 0.0;
    if (std::hypot(car.cu - sensor.u, car.cv - sensor.v) < 6.0) continue;
    if (town.occupied_at(car.cu, car.cv)) continue;
    cars.push_back(car);
  }
  return cars;
}

inline double sample_scale(std::mt19937_64& rng, const AugmentationParams& aug) {
  if (!aug.scale_choices.empty()) return aug.scale_choices[rng() % aug.scale_choices.size()];
  if (aug.scale_min == aug.scale_max) return aug.scale_min;
  return std::exp(uniform(rng, std::log(aug.scale_min), std::log(aug.scale_max)));
}

inline PointCloud to_float_precision(const PointCloud& cloud) {
  std::vector<Point3> pts;
  pts.reserve(cloud.size());
  for (const auto& p : cloud.points())
    pts.push_back({static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)});
  return PointCloud(std::move(pts));
}

}  // namespace detail

/// Samples an ego pose on a road, simulates its scan and renders an overhead
/// patch around it with the configured augmentations.
///
/// The patch spans scale * patch_size * bev_cell / stride meters, so a
/// map-grid cell measures scale * bev_cell meters and gt_scale == scale.
/// gt_pose is the sensor pose in map-grid edge coordinates of the patch.
/// Scan points are stored at float precision so the scene survives a
/// round trip through scan.bin unchanged.
inline Scene render_scene(const TownMap& town, std::uint64_t seed, const AugmentationParams& aug,
                          const TownParams& tp = {}, const Palette& pal = {}) {
  aug.validate();
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  Scene s;
  s.seed = seed;
  s.aug = aug;
  s.ego = detail::sample_ego(town, rng, aug, tp);
  const WorldPose sensor = sensor_pose(s.ego, aug.lidar);

  std::vector<Box> scan_cars;
  if (aug.time_lag) scan_cars = detail::sample_scan_cars(town, rng, sensor, aug.scan_cars, tp);
  LidarParams lp = aug.lidar;
  lp.seed = rng();
  s.scan = detail::to_float_precision(simulate_lidar(town, s.ego, lp, scan_cars));

  const int d = aug.patch_size;
  const int n = aug.grid_size();
  s.gt_scale = detail::sample_scale(rng, aug);
  s.meters_per_pixel = s.gt_scale * aug.bev_cell / aug.stride;
  const double half_m = 0.5 * d * s.meters_per_pixel;

  bool placed = false;
  for (int attempt = 0; attempt < aug.max_retries && !placed; ++attempt) {
    s.patch_rotation = aug.rotation_range > 0.0 ? detail::uniform(rng, -aug.rotation_range, aug.rotation_range) : 0.0;
    const double ox = aug.max_offset > 0.0 ? detail::uniform(rng, -aug.max_offset, aug.max_offset) * half_m : 0.0;
    const double oy = aug.max_offset > 0.0 ? detail::uniform(rng, -aug.max_offset, aug.max_offset) * half_m : 0.0;
    const double c = std::cos(s.patch_rotation), sn = std::sin(s.patch_rotation);
    s.patch_center = {sensor.u + c * ox - sn * oy, sensor.v + sn * ox + c * oy};
    const Vec2 px = world_to_patch(s.patch_center, s.patch_rotation, s.meters_per_pixel, d, sensor.u, sensor.v);
    const double gu = px.x / aug.stride, gv = px.y / aug.stride;
    if (gu >= 0.0 && gu < n && gv >= 0.0 && gv < n) {
      s.gt_pose = Pose(gu, gv, sensor.heading - s.patch_rotation);
      placed = true;
    }
  }
  if (!placed) throw InvalidPose("render_scene: could not place the ego inside the patch");

  // Luminance raster of the town as seen from above, map-side cars included
  // only when time lag is injected.
  std::vector<float> lum(static_cast<std::size_t>(town.cells()) * town.cells());
  for (int r = 0; r < town.cells(); ++r)
    for (int c = 0; c < town.cells(); ++c)
      lum[static_cast<std::size_t>(r) * town.cells() + c] =
          detail::luminance_of(town, pal, (c + 0.5) * town.resolution(), (r + 0.5) * town.resolution(), &tp);
  if (aug.time_lag) {
    const double res = town.resolution();
    for (const auto& car : town.dynamic_objects) {
      const double reach = 0.5 * std::hypot(car.length, car.width);
      const int c0 = std::max(0, static_cast<int>((car.cu - reach) / res));
      const int c1 = std::min(town.cells() - 1, static_cast<int>((car.cu + reach) / res));
      const int r0 = std::max(0, static_cast<int>((car.cv - reach) / res));
      const int r1 = std::min(town.cells() - 1, static_cast<int>((car.cv + reach) / res));
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c)
          if (car.contains((c + 0.5) * res, (r + 0.5) * res))
            lum[static_cast<std::size_t>(r) * town.cells() + c] = static_cast<float>(pal.car);
    }
  }

  const double contrast = 1.0 + detail::uniform(rng, -aug.contrast_jitter, aug.contrast_jitter);
  const double brightness = detail::uniform(rng, -aug.brightness_jitter, aug.brightness_jitter);
  std::normal_distribution<double> px_noise(0.0, aug.pixel_noise);
  const int ss = std::clamp(static_cast<int>(std::ceil(s.meters_per_pixel / town.resolution())), 1, 4);
  s.patch_image = Image8(d, d, 1);
  for (int y = 0; y < d; ++y) {
    for (int x = 0; x < d; ++x) {
      double acc = 0.0;
      for (int sy = 0; sy < ss; ++sy)
        for (int sx = 0; sx < ss; ++sx) {
          const Vec2 w = patch_to_world(s, x + (sx + 0.5) / ss, y + (sy + 0.5) / ss);
          int r, c;
          acc += town.cell_of(w.x, w.y, r, c) ? lum[static_cast<std::size_t>(r) * town.cells() + c] : pal.ground;
        }
      double l = contrast * (acc / (ss * ss) - 0.5) + 0.5 + brightness;
      if (aug.pixel_noise > 0.0) l += px_noise(rng);
      s.patch_image.at(y, x) = static_cast<std::uint8_t>(std::lround(std::clamp(l, 0.0, 1.0) * 255.0));
    }
  }
  s.patch = MapPatch(luminance_from_image(s.patch_image));

  s.gt_skeleton = Grid2D(n, n, 1);
  const double hit_limit = aug.lidar.max_range - 1e-6;
  for (const auto& p : s.scan.points()) {
    if (std::hypot(p.x, p.y) >= hit_limit) continue;
    const Vec2 w = sensor_to_world(sensor, p.x, p.y);
    const Vec2 px = world_to_patch(s.patch_center, s.patch_rotation, s.meters_per_pixel, d, w.x, w.y);
    const int gc = static_cast<int>(std::floor(px.x / aug.stride));
    const int gr = static_cast<int>(std::floor(px.y / aug.stride));
    for (int dr = -aug.skeleton_radius; dr <= aug.skeleton_radius; ++dr)
      for (int dc = -aug.skeleton_radius; dc <= aug.skeleton_radius; ++dc)
        if (s.gt_skeleton.contains(gr + dr, gc + dc)) s.gt_skeleton.at(gr + dr, gc + dc) = 1.0;
  }
  return s;
}

}  // namespace xmloc::synth

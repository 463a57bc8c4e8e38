#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "xmloc/bev/encoder.hpp"
#include "xmloc/bev/voxelize.hpp"
#include "xmloc/core/grid.hpp"
#include "xmloc/core/point_cloud.hpp"
#include "xmloc/map/encoder.hpp"
#include "xmloc/match/pairing.hpp"
#include "xmloc/match/probability.hpp"
#include "xmloc/match/score_volume.hpp"
#include "xmloc/scale/scale_align.hpp"

namespace xmloc {

// How BEV operands are brought to a scale S.
enum class RescaleMode {
  Revoxelize,  // voxelize the scan again with S-scaled pillars
  Nearest,     // rescale_bev on the native grid
};

struct LocalizerConfig {
  VoxelConfig voxel{};
  int channels = kFeatureChannels;
  int map_stride = 4;
  double scale_min = 0.5;
  double scale_max = 10.0;
  int scale_bins = 33;
  double scale_temperature = 0.05;
  int scale_rotations = 32;
  int n_rot = 64;
  bool feature_matching = true;
  bool skeleton_matching = true;
  bool scale_alignment = true;
  RescaleMode rescale = RescaleMode::Revoxelize;
  // BEV channel c is matched against map channel pairing[c] (-1: unused).
  std::vector<int> channel_pairing{2, 1, -1, -1, -1, -1, -1, -1};
  double skeleton_min_span = 0.5;  // meters of vertical extent for a skeleton cell
  int skeleton_tolerance = 1;      // map skeleton widening for skeleton matching
  // Correlate the background channel of the skeleton masks too. Off, only
  // skeleton cells vote, which keeps dense maps from favoring sparse regions.
  bool skeleton_background = false;
  // Match on a finer map grid when S > 1 so the BEV is not coarsened past
  // its native pillars; results are reported on the map_stride grid.
  bool adaptive_stride = true;
  int workers = 1;

  void validate() const {
    voxel.validate();
    if (channels < kFeatureChannels) throw InvalidArgument("LocalizerConfig: channels must be >= 8");
    if (map_stride < 1) throw InvalidArgument("LocalizerConfig: map_stride must be >= 1");
    if (n_rot < 1 || scale_rotations < 1) throw InvalidArgument("LocalizerConfig: rotation counts must be >= 1");
    if (!feature_matching && !skeleton_matching)
      throw InvalidArgument("LocalizerConfig: at least one matching stage must be enabled");
    if (!(scale_temperature > 0.0)) throw InvalidArgument("LocalizerConfig: scale temperature must be positive");
    if (static_cast<int>(channel_pairing.size()) > channels)
      throw InvalidArgument("LocalizerConfig: channel_pairing longer than channels");
    for (int src : channel_pairing)
      if (src < -1 || src >= kFeatureChannels) throw InvalidArgument("LocalizerConfig: channel_pairing entry out of range");
    if (!(skeleton_min_span >= 0.0)) throw InvalidArgument("LocalizerConfig: skeleton_min_span must be >= 0");
    if (skeleton_tolerance < 0) throw InvalidArgument("LocalizerConfig: skeleton_tolerance must be >= 0");
    if (workers < 1) throw InvalidArgument("LocalizerConfig: workers must be >= 1");
    make_bins(scale_min, scale_max, scale_bins);
  }
};

// Pillar geometry at scale S: pillars and x/y ranges grow by S. For S > 1 the
// range is cropped to the smallest even cell count that still covers the
// native range, which only drops cells that are always empty.
inline VoxelConfig scaled_voxel_config(const VoxelConfig& base, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("scaled_voxel_config: scale must be positive");
  VoxelConfig v = base;
  v.dx = base.dx * s;
  v.dy = base.dy * s;
  auto scaled = [s](const Range& r, double d, double step) {
    const double lo = r.min * s, hi = r.max * s;
    if (s <= 1.0) return Range{lo, hi};
    const double half_cells = std::ceil(std::max(std::abs(r.min), std::abs(r.max)) / step - 1e-9);
    const double native_half = 0.5 * r.extent() / d;
    const double keep = std::min(native_half, half_cells);
    const double center = 0.5 * (lo + hi);
    return Range{center - keep * step, center + keep * step};
  };
  v.range_x = scaled(base.range_x, base.dx, v.dx);
  v.range_y = scaled(base.range_y, base.dy, v.dy);
  return v;
}

// Map stride used for matching at scale s: map_stride halved once per octave
// of s (rounded), never below 1 and always dividing map_stride.
inline int matching_stride(const LocalizerConfig& cfg, double s) {
  if (!cfg.adaptive_stride) return cfg.map_stride;
  int k = cfg.map_stride;
  for (long e = std::lround(std::log2(s)); e > 0 && k % 2 == 0; --e) k /= 2;
  return k;
}

struct BevEncoding {
  Grid2D raw;       // unstandardized channels
  Grid2D features;  // standardized, what feature matching consumes
  SkeletonMask skeleton;
};

inline BevEncoding encode_scan(const PointCloud& scan, const LocalizerConfig& cfg, double s, std::uint64_t seed) {
  BevEncoding e;
  if (cfg.rescale == RescaleMode::Revoxelize) {
    e.raw = encode_bev_raw(voxelize(scan, scaled_voxel_config(cfg.voxel, s), seed), cfg.channels);
    e.features = standardize_bev(e.raw);
    e.skeleton = bev_structure_skeleton(e.raw, cfg.skeleton_min_span);
    return e;
  }
  e.raw = encode_bev_raw(voxelize(scan, cfg.voxel, seed), cfg.channels);
  e.features = rescale_bev(standardize_bev(e.raw), s);
  e.skeleton = rescale_bev(bev_structure_skeleton(e.raw, cfg.skeleton_min_span), s);
  e.raw = rescale_bev(e.raw, s);
  return e;
}

struct Localization {
  PoseEstimate estimate;          // pose in map_stride grid cells; row/col index the matching grid
  ScaleEstimate scale;
  ProbabilityVolume probability;  // on the map_stride grid
  int fine_factor = 1;            // matching grid cells per map grid cell
  double runtime_ms = 0.0;
};

namespace detail {

inline SkeletonMask drop_background(SkeletonMask m) {
  for (std::size_t i = 0; i < m.cells(); ++i) m.values()[2 * i] = 0.0;
  return m;
}

}  // namespace detail

/// Full pipeline: encode the map, estimate the scale from skeletons, encode
/// the scan at that scale, build the feature and skeleton score volumes, fuse
/// them and take the most likely pose. Disabled matching stages contribute
/// zero; with scale alignment off the scale is 1 unless `fixed_scale` is set.
inline Localization localize(const PointCloud& scan, const MapPatch& patch, const LocalizerConfig& cfg,
                             std::uint64_t seed = 0, std::optional<double> fixed_scale = std::nullopt) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Localization out;
  if (fixed_scale) {
    out.scale.scale = *fixed_scale;
  } else if (cfg.scale_alignment) {
    const SkeletonMask f_map_s = map_skeleton(patch, cfg.map_stride);
    auto skeleton_at = [&](double s) { return encode_scan(scan, cfg, s, seed).skeleton; };
    out.scale = score_scales_with(skeleton_at, f_map_s, make_bins(cfg.scale_min, cfg.scale_max, cfg.scale_bins),
                                  cfg.scale_rotations, cfg.scale_temperature, cfg.workers);
  }
  const int stride = matching_stride(cfg, out.scale.scale);
  const int factor = cfg.map_stride / stride;
  const BevEncoding bev = encode_scan(scan, cfg, out.scale.scale / factor, seed);

  const int n = patch.size() / stride;
  ScoreVolume omega(cfg.n_rot, n, n);
  ScoreVolume psi(cfg.n_rot, n, n);
  if (cfg.feature_matching) {
    const Grid2D f_map = pair_channels(map_features(patch, stride, kFeatureChannels), cfg.channel_pairing,
                                       cfg.channels);
    omega = score_volume(f_map, bev.features, cfg.n_rot, cfg.workers);
  }
  if (cfg.skeleton_matching) {
    SkeletonMask f_map_s = widen_skeleton(map_skeleton(patch, stride), cfg.skeleton_tolerance);
    if (!cfg.skeleton_background) f_map_s = detail::drop_background(std::move(f_map_s));
    psi = skeleton_score_volume(f_map_s, bev.skeleton, cfg.n_rot, cfg.workers);
  }
  const ProbabilityVolume fine = fuse_probability(omega, psi);
  out.estimate = estimate_pose(fine);
  out.estimate.pose = Pose(out.estimate.pose.u() / factor, out.estimate.pose.v() / factor, out.estimate.pose.theta());
  out.probability = pool_probability(fine, factor);
  out.fine_factor = factor;
  out.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace xmloc

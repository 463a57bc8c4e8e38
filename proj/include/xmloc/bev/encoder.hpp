#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "xmloc/bev/voxelize.hpp"
#include "xmloc/core/error.hpp"
#include "xmloc/core/grid.hpp"
#include "xmloc/image/morphology.hpp"

namespace xmloc {

inline constexpr int kFeatureChannels = 8;
inline constexpr double kVarianceFloor = 1e-6;

/// Standardizes the selected channels to zero mean and unit variance.
///
/// Statistics are taken over cells where `active` is set, and only those
/// cells are rewritten; inactive cells keep their value. Channels listed in
/// `skip` are left untouched.
inline void standardize_channels(Grid2D& g, const std::vector<std::uint8_t>& active, std::span<const int> skip = {}) {
  const std::size_t cells = g.cells();
  const int nch = g.channels();
  auto vals = g.values();
  for (int ch = 0; ch < nch; ++ch) {
    if (std::find(skip.begin(), skip.end(), ch) != skip.end()) continue;
    double n = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < cells; ++i)
      if (active[i]) {
        sum += vals[i * nch + ch];
        n += 1.0;
      }
    if (n == 0.0) continue;
    const double mean = sum / n;
    double var = 0.0;
    for (std::size_t i = 0; i < cells; ++i)
      if (active[i]) {
        const double d = vals[i * nch + ch] - mean;
        var += d * d;
      }
    const double sd = std::sqrt(std::max(var / n, kVarianceFloor));
    for (std::size_t i = 0; i < cells; ++i)
      if (active[i]) vals[i * nch + ch] = (vals[i * nch + ch] - mean) / sd;
  }
}

/// Handcrafted per-pillar BEV features.
///
/// Channels: occupancy, log(1 + count), min z, max z, mean z, z span, radial
/// distance of the cell center over the maximum range, then zero-valued
/// reserved channels. Empty cells are all zero. Channels 1..C-1 are
/// standardized over occupied cells; occupancy stays a 0/1 indicator because
/// it is constant over occupied cells and it carries the mask the skeleton
/// stage binarizes.
inline Grid2D encode_bev_raw(const PillarGrid& grid, int channels = kFeatureChannels) {
  if (channels < kFeatureChannels) throw InvalidArgument("encode_bev: at least 8 channels required");
  const int h = grid.height();
  const int w = grid.width();
  Grid2D f(h, w, channels, grid.config().dx);
  const double max_range = grid.config().max_range();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto& pts = grid.pillar(r, c);
      if (pts.empty()) continue;
      double zmin = std::numeric_limits<double>::infinity();
      double zmax = -zmin;
      double zsum = 0.0;
      for (const auto& p : pts) {
        zmin = std::min(zmin, p.z);
        zmax = std::max(zmax, p.z);
        zsum += p.z;
      }
      f.at(r, c, 0) = 1.0;
      f.at(r, c, 1) = std::log1p(static_cast<double>(pts.size()));
      f.at(r, c, 2) = zmin;
      f.at(r, c, 3) = zmax;
      f.at(r, c, 4) = zsum / static_cast<double>(pts.size());
      f.at(r, c, 5) = zmax - zmin;
      f.at(r, c, 6) = std::hypot(grid.cell_center_x(c), grid.cell_center_y(r)) / max_range;
    }
  }
  return f;
}

inline Grid2D standardize_bev(Grid2D f) {
  std::vector<std::uint8_t> occupied(f.cells());
  for (std::size_t i = 0; i < f.cells(); ++i) occupied[i] = f.values()[i * f.channels()] > 0.5;
  const int skip[] = {0};
  standardize_channels(f, occupied, skip);
  return f;
}

inline Grid2D encode_bev(const PillarGrid& grid, int channels = kFeatureChannels) {
  return standardize_bev(encode_bev_raw(grid, channels));
}

inline BinaryMask occupancy_mask(const Grid2D& f) {
  BinaryMask m(f.height(), f.width());
  for (std::size_t i = 0; i < f.cells(); ++i) m.bits[i] = f.values()[i * f.channels()] > 0.5;
  return m;
}

// Thinned occupancy as a clamped two-channel probability mask.
inline SkeletonMask bev_skeleton(const Grid2D& f) {
  const BinaryMask skel = zhang_suen_thin(occupancy_mask(f));
  return skeleton_from_binary(skel.bits, f.height(), f.width(), f.cell_size());
}

/// Skeleton of vertical structure only: occupied cells whose raw z span is
/// below `min_span` (flat ground returns) are cleared before thinning.
/// Expects the unstandardized output of encode_bev_raw.
inline SkeletonMask bev_structure_skeleton(const Grid2D& raw, double min_span) {
  if (raw.channels() < kFeatureChannels) throw InvalidArgument("bev_structure_skeleton: raw BEV features required");
  BinaryMask m = occupancy_mask(raw);
  for (std::size_t i = 0; i < raw.cells(); ++i)
    if (raw.values()[i * raw.channels() + 5] < min_span) m.bits[i] = 0;
  const BinaryMask skel = zhang_suen_thin(m);
  return skeleton_from_binary(skel.bits, raw.height(), raw.width(), raw.cell_size());
}

}  // namespace xmloc

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/point_cloud.hpp"

namespace xmloc {

struct Range {
  double min = 0.0;
  double max = 0.0;
  double extent() const { return max - min; }
  friend bool operator==(const Range&, const Range&) = default;
};

// Pillar geometry. Defaults: 2 x 2 x 30 m pillars over [-100, 100]^2 x [-10, 20],
// at most 128 points per pillar.
struct VoxelConfig {
  double dx = 2.0;
  double dy = 2.0;
  double dz = 30.0;
  Range range_x{-100.0, 100.0};
  Range range_y{-100.0, 100.0};
  Range range_z{-10.0, 20.0};
  int max_points_per_voxel = 128;

  int cols() const { return static_cast<int>(std::lround(range_x.extent() / dx)); }
  int rows() const { return static_cast<int>(std::lround(range_y.extent() / dy)); }
  int layers() const { return static_cast<int>(std::lround(range_z.extent() / dz)); }
  double max_range() const {
    return std::max({std::abs(range_x.min), std::abs(range_x.max), std::abs(range_y.min), std::abs(range_y.max)});
  }

  void validate() const {
    auto whole = [](double extent, double step) {
      const double n = extent / step;
      return std::abs(n - std::round(n)) < 1e-9 * std::max(1.0, n) && std::round(n) >= 1.0;
    };
    if (!(dx > 0.0 && dy > 0.0 && dz > 0.0)) throw InvalidArgument("VoxelConfig: pillar dimensions must be positive");
    if (!(range_x.min < range_x.max && range_y.min < range_y.max && range_z.min < range_z.max))
      throw InvalidArgument("VoxelConfig: ranges must satisfy min < max");
    if (!whole(range_x.extent(), dx) || !whole(range_y.extent(), dy) || !whole(range_z.extent(), dz))
      throw InvalidArgument("VoxelConfig: ranges must divide into whole cells");
    if (max_points_per_voxel <= 0) throw InvalidArgument("VoxelConfig: max_points_per_voxel must be positive");
  }

  friend bool operator==(const VoxelConfig&, const VoxelConfig&) = default;
};

/// Points binned into vertical pillars.
///
/// Grid columns follow +x (forward) and grid rows follow -y, so the grid reads
/// like a top-down image with the vehicle facing right:
///   col = floor((x - x_min) / dx),  row = floor((y_max - y) / dy).
/// A point is in range when x in [x_min, x_max), y in (y_min, y_max] and
/// z in [z_min, z_max).
class PillarGrid {
 public:
  PillarGrid() = default;
  explicit PillarGrid(const VoxelConfig& cfg)
      : cfg_(cfg), pillars_(static_cast<std::size_t>(cfg.rows()) * cfg.cols()) {}

  int height() const { return cfg_.rows(); }
  int width() const { return cfg_.cols(); }
  const VoxelConfig& config() const { return cfg_; }

  const std::vector<Point3>& pillar(int r, int c) const { return pillars_[static_cast<std::size_t>(r) * width() + c]; }
  std::vector<Point3>& pillar(int r, int c) { return pillars_[static_cast<std::size_t>(r) * width() + c]; }

  std::size_t total_points() const {
    std::size_t n = 0;
    for (const auto& p : pillars_) n += p.size();
    return n;
  }
  std::size_t occupied() const {
    return static_cast<std::size_t>(std::count_if(pillars_.begin(), pillars_.end(), [](const auto& p) { return !p.empty(); }));
  }

  // Cell-center position of (row, col) in the sensor frame.
  double cell_center_x(int c) const { return cfg_.range_x.min + (c + 0.5) * cfg_.dx; }
  double cell_center_y(int r) const { return cfg_.range_y.max - (r + 0.5) * cfg_.dy; }

  friend bool operator==(const PillarGrid&, const PillarGrid&) = default;

 private:
  VoxelConfig cfg_;
  std::vector<std::vector<Point3>> pillars_;
};

// Returns the (row, col) pillar holding p, or false when p is out of range.
inline bool pillar_index(const VoxelConfig& cfg, const Point3& p, int& row, int& col) {
  if (!(p.x >= cfg.range_x.min && p.x < cfg.range_x.max)) return false;
  if (!(p.y > cfg.range_y.min && p.y <= cfg.range_y.max)) return false;
  if (!(p.z >= cfg.range_z.min && p.z < cfg.range_z.max)) return false;
  col = static_cast<int>(std::floor((p.x - cfg.range_x.min) / cfg.dx));
  row = static_cast<int>(std::floor((cfg.range_y.max - p.y) / cfg.dy));
  return col >= 0 && col < cfg.cols() && row >= 0 && row < cfg.rows();
}

// Pillars over the cap keep a uniformly random subset (partial Fisher-Yates
// driven by a seeded mt19937_64), in original order.
inline PillarGrid voxelize(const PointCloud& cloud, const VoxelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  PillarGrid grid(cfg);
  for (const auto& p : cloud.points()) {
    int r = 0, c = 0;
    if (pillar_index(cfg, p, r, c)) grid.pillar(r, c).push_back(p);
  }
  std::mt19937_64 rng(seed);
  const auto cap = static_cast<std::size_t>(cfg.max_points_per_voxel);
  std::vector<std::size_t> idx;
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      auto& pts = grid.pillar(r, c);
      if (pts.size() <= cap) continue;
      idx.resize(pts.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t i = 0; i < cap; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cap));
      std::vector<Point3> kept;
      kept.reserve(cap);
      for (std::size_t i = 0; i < cap; ++i) kept.push_back(pts[idx[i]]);
      pts = std::move(kept);
    }
  }
  return grid;
}

}  // namespace xmloc

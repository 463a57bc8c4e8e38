#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/geometry.hpp"

namespace xmloc::synth {

// Oriented rectangle in world meters (image convention: u right, v down).
struct Box {
  double cu = 0.0;
  double cv = 0.0;
  double length = 4.5;  // along heading
  double width = 2.0;
  double heading = 0.0;
  double height = 1.5;

  bool contains(double u, double v) const {
    const double du = u - cu, dv = v - cv;
    const double c = std::cos(heading), s = std::sin(heading);
    const double a = c * du + s * dv;
    const double b = -s * du + c * dv;
    return std::abs(a) <= 0.5 * length && std::abs(b) <= 0.5 * width;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

enum class Surface : std::uint8_t { Ground = 0, Road = 1, Building = 2 };

struct TownParams {
  double world_size = 800.0;   // meters, square
  double resolution = 0.5;     // meters per raster cell
  double road_pitch = 90.0;    // mean spacing of the Manhattan road grid
  double road_width = 14.0;
  double building_density = 0.8;  // probability that a lot carries a building
  double min_lot = 18.0;
  double max_lot = 45.0;
  double min_setback = 2.0;
  double max_setback = 6.0;
  double min_height = 4.0;
  double max_height = 30.0;
  int map_cars = 80;  // dynamic objects present in the overhead render

  void validate() const {
    if (!(world_size > 0.0 && resolution > 0.0 && road_pitch > road_width && road_width > 0.0))
      throw InvalidArgument("TownParams: degenerate world/road geometry");
    if (!(building_density >= 0.0 && building_density <= 1.0))
      throw InvalidArgument("TownParams: building_density must be in [0, 1]");
    if (!(min_lot > 0.0 && max_lot >= min_lot && min_setback >= 0.0 && max_setback >= min_setback))
      throw InvalidArgument("TownParams: degenerate lot parameters");
    if (!(min_height > 0.0 && max_height >= min_height)) throw InvalidArgument("TownParams: bad height range");
    if (map_cars < 0) throw InvalidArgument("TownParams: map_cars must be >= 0");
  }
};

/// Rasterized town: surface class and building height per cell.
class TownMap {
 public:
  TownMap() = default;
  TownMap(int cells, double resolution)
      : cells_(cells), res_(resolution), surface_(static_cast<std::size_t>(cells) * cells, Surface::Ground),
        heights_(static_cast<std::size_t>(cells) * cells, 0.0f) {
    if (cells <= 0 || !(resolution > 0.0)) throw InvalidArgument("TownMap: degenerate raster");
  }

  int cells() const { return cells_; }
  double resolution() const { return res_; }
  double world_size() const { return cells_ * res_; }

  bool in_raster(int r, int c) const { return r >= 0 && r < cells_ && c >= 0 && c < cells_; }
  Surface surface(int r, int c) const { return surface_[idx(r, c)]; }
  bool occupied(int r, int c) const { return in_raster(r, c) && surface_[idx(r, c)] == Surface::Building; }
  float height(int r, int c) const { return heights_[idx(r, c)]; }

  // World point (meters) to raster cell; false outside the world.
  bool cell_of(double u, double v, int& r, int& c) const {
    c = static_cast<int>(std::floor(u / res_));
    r = static_cast<int>(std::floor(v / res_));
    return in_raster(r, c);
  }
  bool occupied_at(double u, double v) const {
    int r, c;
    return cell_of(u, v, r, c) && occupied(r, c);
  }

  void set_surface(int r, int c, Surface s) { surface_[idx(r, c)] = s; }
  void set_building(int r, int c, float h) {
    surface_[idx(r, c)] = Surface::Building;
    heights_[idx(r, c)] = h;
  }
  // Fills the axis-aligned rectangle [u0, u1) x [v0, v1) in meters.
  void fill_rect(double u0, double v0, double u1, double v1, Surface s, float h = 0.0f) {
    const int c0 = std::max(0, static_cast<int>(std::floor(u0 / res_)));
    const int r0 = std::max(0, static_cast<int>(std::floor(v0 / res_)));
    const int c1 = std::min(cells_, static_cast<int>(std::ceil(u1 / res_)));
    const int r1 = std::min(cells_, static_cast<int>(std::ceil(v1 / res_)));
    for (int r = r0; r < r1; ++r)
      for (int c = c0; c < c1; ++c) {
        surface_[idx(r, c)] = s;
        heights_[idx(r, c)] = s == Surface::Building ? h : 0.0f;
      }
  }

  std::size_t count(Surface s) const { return static_cast<std::size_t>(std::count(surface_.begin(), surface_.end(), s)); }

  std::vector<Box> dynamic_objects;
  // Road centerlines (meters) of the Manhattan grid.
  std::vector<double> road_u;
  std::vector<double> road_v;

  friend bool operator==(const TownMap&, const TownMap&) = default;

 private:
  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * cells_ + c; }

  int cells_ = 0;
  double res_ = 0.5;
  std::vector<Surface> surface_;
  std::vector<float> heights_;
};

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Splits [lo, hi) into pieces of length in [min_len, max_len] (last piece may
// absorb the remainder).
inline std::vector<double> split_interval(std::mt19937_64& rng, double lo, double hi, double min_len, double max_len) {
  std::vector<double> cuts{lo};
  double x = lo;
  while (hi - x > max_len) {
    const double step = uniform(rng, min_len, max_len);
    if (hi - (x + step) < min_len) break;
    x += step;
    cuts.push_back(x);
  }
  cuts.push_back(hi);
  return cuts;
}

inline std::vector<double> road_lines(std::mt19937_64& rng, const TownParams& p) {
  std::vector<double> lines;
  double x = uniform(rng, 0.2, 0.8) * p.road_pitch;
  while (x < p.world_size) {
    lines.push_back(x);
    x += p.road_pitch * uniform(rng, 0.7, 1.3);
  }
  return lines;
}

}  // namespace detail

/// Procedural Manhattan town: jittered road grid, blocks split into lots,
/// lots carrying set-back rectangular buildings with heights in
/// [min_height, max_height], and car-sized dynamic objects on roads.
/// Deterministic per seed.
inline TownMap generate_town(std::uint64_t seed, const TownParams& p = {}) {
  p.validate();
  std::mt19937_64 rng(seed);
  const int cells = static_cast<int>(std::lround(p.world_size / p.resolution));
  TownMap town(cells, p.resolution);
  town.road_u = detail::road_lines(rng, p);
  town.road_v = detail::road_lines(rng, p);
  const double hw = 0.5 * p.road_width;
  for (double u : town.road_u) town.fill_rect(u - hw, 0.0, u + hw, p.world_size, Surface::Road);
  for (double v : town.road_v) town.fill_rect(0.0, v - hw, p.world_size, v + hw, Surface::Road);

  // Block edges, including the world border.
  auto edges = [&](const std::vector<double>& lines) {
    std::vector<std::pair<double, double>> blocks;
    double start = 0.0;
    for (double l : lines) {
      if (l - hw > start) blocks.emplace_back(start, l - hw);
      start = l + hw;
    }
    if (p.world_size > start) blocks.emplace_back(start, p.world_size);
    return blocks;
  };
  const auto blocks_u = edges(town.road_u);
  const auto blocks_v = edges(town.road_v);
  for (const auto& [bu0, bu1] : blocks_u) {
    for (const auto& [bv0, bv1] : blocks_v) {
      const auto lots_u = detail::split_interval(rng, bu0, bu1, p.min_lot, p.max_lot);
      const auto lots_v = detail::split_interval(rng, bv0, bv1, p.min_lot, p.max_lot);
      for (std::size_t i = 0; i + 1 < lots_u.size(); ++i) {
        for (std::size_t j = 0; j + 1 < lots_v.size(); ++j) {
          const double build = detail::uniform(rng, 0.0, 1.0);
          const double s0 = detail::uniform(rng, p.min_setback, p.max_setback);
          const double s1 = detail::uniform(rng, p.min_setback, p.max_setback);
          const double s2 = detail::uniform(rng, p.min_setback, p.max_setback);
          const double s3 = detail::uniform(rng, p.min_setback, p.max_setback);
          const double h = detail::uniform(rng, p.min_height, p.max_height);
          if (build >= p.building_density) continue;
          const double u0 = lots_u[i] + s0, u1 = lots_u[i + 1] - s1;
          const double v0 = lots_v[j] + s2, v1 = lots_v[j + 1] - s3;
          if (u1 - u0 < 4.0 || v1 - v0 < 4.0) continue;
          town.fill_rect(u0, v0, u1, v1, Surface::Building, static_cast<float>(h));
        }
      }
    }
  }

  for (int k = 0; k < p.map_cars && !(town.road_u.empty() && town.road_v.empty()); ++k) {
    const bool along_u = town.road_v.empty() || (!town.road_u.empty() && (rng() & 1u));
    Box car;
    if (along_u) {  // driving along a vertical road (constant u)
      const double line = town.road_u[rng() % town.road_u.size()];
      car.cu = line + detail::uniform(rng, -0.6, 0.6) * hw;
      car.cv = detail::uniform(rng, 3.0, p.world_size - 3.0);
      car.heading = kPi / 2.0;
    } else {
      const double line = town.road_v[rng() % town.road_v.size()];
      car.cv = line + detail::uniform(rng, -0.6, 0.6) * hw;
      car.cu = detail::uniform(rng, 3.0, p.world_size - 3.0);
      car.heading = 0.0;
    }
    town.dynamic_objects.push_back(car);
  }
  return town;
}

}  // namespace xmloc::synth

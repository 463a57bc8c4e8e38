#pragma once

#include <cmath>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/geometry.hpp"
#include "xmloc/core/grid.hpp"

namespace xmloc {

namespace detail {

// Nearest lattice index to a centered coordinate z on an axis of n cells.
// Rounding is odd-symmetric (f(-z) == -f(z) in centered terms), which keeps
// sampled rotations commuting with exact quarter turns.
inline int nearest_cell(double z, int n) {
  if (n % 2 == 1) return n / 2 + static_cast<int>(std::round(z));
  if (!std::signbit(z)) return n / 2 + static_cast<int>(std::floor(z));
  return n / 2 - 1 - static_cast<int>(std::floor(-z));
}

// Exact quarter turns: one turn sends cell (i, j) to (j, n - 1 - i).
inline Grid2D quarter_turns(const Grid2D& f, int k) {
  k = ((k % 4) + 4) % 4;
  if (k == 0) return f;
  const int n = f.height();
  const int nch = f.channels();
  Grid2D out(n, n, nch, f.cell_size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int di = i, dj = j;
      for (int t = 0; t < k; ++t) {
        const int ti = dj;
        const int tj = n - 1 - di;
        di = ti;
        dj = tj;
      }
      for (int ch = 0; ch < nch; ++ch) out.at(di, dj, ch) = f.at(i, j, ch);
    }
  }
  return out;
}

// Inverse-mapped nearest-neighbour rotation by phi about the grid center;
// cells whose source falls outside the grid become 0.
inline Grid2D sample_rotation(const Grid2D& f, double phi) {
  const int n = f.height();
  const int nch = f.channels();
  const double center = (n - 1) / 2.0;
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Grid2D out(n, n, nch, f.cell_size());
  for (int r = 0; r < n; ++r) {
    const double qy = r - center;
    for (int col = 0; col < n; ++col) {
      const double qx = col - center;
      const double sx = c * qx + s * qy;
      const double sy = -s * qx + c * qy;
      const int sc = nearest_cell(sx, n);
      const int sr = nearest_cell(sy, n);
      if (sr < 0 || sr >= n || sc < 0 || sc >= n) continue;
      for (int ch = 0; ch < nch; ++ch) out.at(r, col, ch) = f.at(sr, sc, ch);
    }
  }
  return out;
}

inline void check_square(const Grid2D& f, const char* who) {
  if (!f.square()) throw InvalidArgument(std::string(who) + ": square grid required");
}

}  // namespace detail

/// Rotates a square grid by theta (counterclockwise in the column/row plane)
/// about its center ((H-1)/2, (W-1)/2).
///
/// theta is split into whole quarter turns, applied as an exact lattice
/// permutation, and a residual in [-pi/4, pi/4] resampled by nearest
/// neighbour. Multiples of pi/2 therefore never resample.
inline Grid2D rotate_feature(const Grid2D& f, double theta) {
  detail::check_square(f, "rotate_feature");
  const double quarter = kPi / 2.0;
  const long k = std::lround(theta / quarter);
  double phi = theta - static_cast<double>(k) * quarter;
  if (std::abs(phi) < 1e-12) phi = 0.0;
  const Grid2D base = phi == 0.0 ? f : detail::sample_rotation(f, phi);
  return detail::quarter_turns(base, static_cast<int>(k % 4));
}

// Angle of rotation slice i out of n: -pi + 2*pi*i/n.
inline double rotation_angle(int i, int n) { return -kPi + 2.0 * kPi * i / n; }

/// Rotation slice i of n_rot evenly spaced rotations.
///
/// When n_rot is a multiple of 4 the residual angle is derived from
/// i mod (n_rot / 4) in integer arithmetic, so slice i + n_rot/4 is exactly
/// one quarter turn of slice i.
inline Grid2D rotation_slice(const Grid2D& f, int i, int n_rot) {
  detail::check_square(f, "rotation_slice");
  if (n_rot % 4 != 0) return rotate_feature(f, rotation_angle(i, n_rot));
  const int per_quarter = n_rot / 4;
  int k = i / per_quarter - 2;
  int j = i % per_quarter;
  if (2 * j > per_quarter) {
    j -= per_quarter;
    k += 1;
  }
  const Grid2D base = j == 0 ? f : detail::sample_rotation(f, (kPi / 2.0) * j / per_quarter);
  return detail::quarter_turns(base, k);
}

}  // namespace xmloc

#pragma once

#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/grid.hpp"
#include "xmloc/core/parallel.hpp"
#include "xmloc/match/fft.hpp"
#include "xmloc/match/rotate.hpp"

namespace xmloc {

/// Scores over n_rot rotations x map rows x map columns, rotation-major.
///
/// Entry (i, a, b) scores the hypothesis that places the BEV anchor cell
/// (floor(H/2), floor(W/2)) on map cell (a, b) with the BEV rotated by
/// angles[i]. For even BEV sizes the anchor cell's top-left corner is the grid
/// center, so the hypothesis corresponds to the pose (u = b, v = a).
struct ScoreVolume {
  int n_rot = 0;
  int height = 0;
  int width = 0;
  std::vector<double> scores;
  std::vector<double> angles;

  ScoreVolume() = default;
  ScoreVolume(int nr, int h, int w)
      : n_rot(nr), height(h), width(w), scores(static_cast<std::size_t>(nr) * h * w, 0.0), angles(nr) {
    for (int i = 0; i < nr; ++i) angles[i] = rotation_angle(i, nr);
  }

  std::size_t slice_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t index(int i, int a, int b) const { return (i * slice_size()) + static_cast<std::size_t>(a) * width + b; }
  double& at(int i, int a, int b) { return scores[index(i, a, b)]; }
  double at(int i, int a, int b) const { return scores[index(i, a, b)]; }
  bool same_shape(const ScoreVolume& o) const {
    return n_rot == o.n_rot && height == o.height && width == o.width && angles == o.angles;
  }
};

namespace detail {

inline void check_operands(const Grid2D& map, const Grid2D& bev, int n_rot, const char* who) {
  if (map.channels() != bev.channels())
    throw InvalidArgument(std::string(who) + ": channel mismatch (" + std::to_string(map.channels()) + " vs " +
                          std::to_string(bev.channels()) + ")");
  if (n_rot < 1) throw InvalidArgument(std::string(who) + ": n_rot must be >= 1");
  check_square(bev, who);
}

inline bool channel_is_zero(const Grid2D& g, int ch) {
  const auto v = g.values();
  for (std::size_t i = 0; i < g.cells(); ++i)
    if (v[i * g.channels() + ch] != 0.0) return false;
  return true;
}

}  // namespace detail

/// Exhaustive rotation x translation correlation of a BEV grid against a map
/// grid, summed over channels and divided by the BEV area.
///
/// Each rotation slice is a linear (zero-padded) cross-correlation computed
/// with real FFTs of size next_pow2(map + bev - 1); the map spectrum is shared
/// across slices. Slices are distributed over `workers` threads and each one
/// is computed independently, so the result does not depend on the worker
/// count. The BEV may be larger than the map; cells falling outside the map
/// contribute nothing.
inline ScoreVolume score_volume(const Grid2D& f_map, const Grid2D& f_bev, int n_rot, int workers = 1) {
  detail::check_operands(f_map, f_bev, n_rot, "score_volume");
  const int hm = f_map.height(), wm = f_map.width();
  const int hb = f_bev.height(), wb = f_bev.width();
  const int nch = f_map.channels();
  const int n = next_pow2(std::max(hm + hb - 1, wm + wb - 1));
  const Fft2d& fft = Fft2d::get(n);
  const std::size_t csize = fft.complex_size();

  std::vector<int> live;
  for (int ch = 0; ch < nch; ++ch)
    if (!detail::channel_is_zero(f_bev, ch) && !detail::channel_is_zero(f_map, ch)) live.push_back(ch);

  ScoreVolume vol(n_rot, hm, wm);
  if (live.empty()) return vol;

  std::vector<ComplexBuffer> map_spec;
  {
    RealBuffer buf = make_real_buffer(fft.real_size());
    for (int ch : live) {
      std::fill_n(buf.get(), fft.real_size(), 0.0);
      for (int r = 0; r < hm; ++r)
        for (int c = 0; c < wm; ++c) buf[static_cast<std::size_t>(r) * n + c] = f_map.at(r, c, ch);
      map_spec.push_back(make_complex_buffer(csize));
      fft.forward(buf.get(), map_spec.back().get());
    }
  }

  const int anchor_r = hb / 2;
  const int anchor_c = wb / 2;
  const double norm = 1.0 / (static_cast<double>(n) * n * hb * wb);

  struct Workspace {
    RealBuffer real;
    ComplexBuffer spec;
    ComplexBuffer acc;
  };
  const int nworkers = std::max(1, std::min({workers, n_rot, default_workers()}));
  std::vector<Workspace> ws(nworkers);
  for (auto& w : ws) {
    w.real = make_real_buffer(fft.real_size());
    w.spec = make_complex_buffer(csize);
    w.acc = make_complex_buffer(csize);
  }

  parallel_for(static_cast<std::size_t>(n_rot), nworkers, [&](int wid, std::size_t slice) {
    Workspace& w = ws[wid];
    const int i = static_cast<int>(slice);
    const Grid2D rot = rotation_slice(f_bev, i, n_rot);
    std::memset(w.acc.get(), 0, csize * sizeof(fftw_complex));
    for (std::size_t k = 0; k < live.size(); ++k) {
      const int ch = live[k];
      std::fill_n(w.real.get(), fft.real_size(), 0.0);
      for (int r = 0; r < hb; ++r)
        for (int c = 0; c < wb; ++c) w.real[static_cast<std::size_t>(r) * n + c] = rot.at(r, c, ch);
      fft.forward(w.real.get(), w.spec.get());
      const fftw_complex* m = map_spec[k].get();
      for (std::size_t j = 0; j < csize; ++j) {
        // acc += M * conj(T)
        const double mr = m[j][0], mi = m[j][1];
        const double tr = w.spec[j][0], ti = w.spec[j][1];
        w.acc[j][0] += mr * tr + mi * ti;
        w.acc[j][1] += mi * tr - mr * ti;
      }
    }
    fft.inverse(w.acc.get(), w.real.get());
    for (int a = 0; a < hm; ++a) {
      const int tr = ((a - anchor_r) % n + n) % n;
      for (int b = 0; b < wm; ++b) {
        const int tc = ((b - anchor_c) % n + n) % n;
        vol.at(i, a, b) = w.real[static_cast<std::size_t>(tr) * n + tc] * norm;
      }
    }
  });
  return vol;
}

// Skeleton matching: the same correlation over two-channel skeleton masks.
inline ScoreVolume skeleton_score_volume(const SkeletonMask& f_map_s, const Grid2D& f_bev_scaled, int n_rot,
                                         int workers = 1) {
  if (f_map_s.channels() != 2 || f_bev_scaled.channels() != 2)
    throw InvalidArgument("skeleton_score_volume: two-channel skeleton masks required");
  return score_volume(f_map_s, f_bev_scaled, n_rot, workers);
}

inline constexpr int kBruteForceMaxMap = 64;

/// Direct nested-loop evaluation of the same correlation, used as the
/// reference for score_volume. Shares only the rotation sampling with it.
inline ScoreVolume brute_force_score_volume(const Grid2D& f_map, const Grid2D& f_bev, int n_rot) {
  detail::check_operands(f_map, f_bev, n_rot, "brute_force_score_volume");
  if (f_map.height() > kBruteForceMaxMap || f_map.width() > kBruteForceMaxMap)
    throw GuardError("brute_force_score_volume: map grid exceeds " + std::to_string(kBruteForceMaxMap) + " cells");
  const int hm = f_map.height(), wm = f_map.width();
  const int hb = f_bev.height(), wb = f_bev.width();
  const int nch = f_map.channels();
  ScoreVolume vol(n_rot, hm, wm);
  const double area = static_cast<double>(hb) * wb;
  for (int i = 0; i < n_rot; ++i) {
    const Grid2D rot = rotation_slice(f_bev, i, n_rot);
    for (int a = 0; a < hm; ++a) {
      for (int b = 0; b < wm; ++b) {
        double sum = 0.0;
        for (int r = 0; r < hb; ++r) {
          const int mr = a + r - hb / 2;
          if (mr < 0 || mr >= hm) continue;
          for (int c = 0; c < wb; ++c) {
            const int mc = b + c - wb / 2;
            if (mc < 0 || mc >= wm) continue;
            for (int ch = 0; ch < nch; ++ch) sum += f_map.at(mr, mc, ch) * rot.at(r, c, ch);
          }
        }
        vol.at(i, a, b) = sum / area;
      }
    }
  }
  return vol;
}

}  // namespace xmloc

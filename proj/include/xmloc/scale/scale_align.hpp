#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/grid.hpp"
#include "xmloc/match/score_volume.hpp"

namespace xmloc {

// Geometrically spaced scale bins over [s_min, s_max].
struct ScaleBins {
  std::vector<double> values;

  double step_ratio() const { return values.size() > 1 ? values[1] / values[0] : 1.0; }
};

inline ScaleBins make_bins(double s_min, double s_max, int n) {
  if (!(s_min > 0.0 && s_max > s_min && n >= 2))
    throw InvalidArgument("make_bins: require 0 < s_min < s_max and n >= 2");
  ScaleBins b;
  b.values.resize(n);
  const double ratio = s_max / s_min;
  for (int i = 0; i < n; ++i) b.values[i] = s_min * std::pow(ratio, static_cast<double>(i) / (n - 1));
  b.values.front() = s_min;
  b.values.back() = s_max;
  return b;
}

inline int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

/// Resamples a BEV grid by scale factor S (map cell size / BEV cell size),
/// keeping its dimensions.
///
/// S > 1 shrinks the whole grid by nearest neighbour to round(H/S) x round(W/S)
/// and writes it centered into zeros. S < 1 enlarges the central
/// round(H*S) x round(W*S) window to H x W. Centering offsets are
/// floor((H - m) / 2). Rounding is half-up.
inline Grid2D rescale_bev(const Grid2D& f, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("rescale_bev: scale must be positive");
  if (s == 1.0) return f;
  const int h = f.height(), w = f.width(), nch = f.channels();
  Grid2D out(h, w, nch, f.cell_size());
  if (s > 1.0) {
    const int mh = round_half_up(h / s), mw = round_half_up(w / s);
    if (mh < 1 || mw < 1) throw DegenerateScale("rescale_bev: scaled grid collapses below one cell");
    const int oh = (h - mh) / 2, ow = (w - mw) / 2;
    for (int i = 0; i < mh; ++i) {
      const int sr = std::min(h - 1, static_cast<int>((i + 0.5) * h / mh));
      for (int j = 0; j < mw; ++j) {
        const int sc = std::min(w - 1, static_cast<int>((j + 0.5) * w / mw));
        for (int ch = 0; ch < nch; ++ch) out.at(oh + i, ow + j, ch) = f.at(sr, sc, ch);
      }
    }
  } else {
    const int mh = round_half_up(h * s), mw = round_half_up(w * s);
    if (mh < 1 || mw < 1) throw DegenerateScale("rescale_bev: central window collapses below one cell");
    const int oh = (h - mh) / 2, ow = (w - mw) / 2;
    for (int i = 0; i < h; ++i) {
      const int sr = oh + std::min(mh - 1, static_cast<int>((i + 0.5) * mh / h));
      for (int j = 0; j < w; ++j) {
        const int sc = ow + std::min(mw - 1, static_cast<int>((j + 0.5) * mw / w));
        for (int ch = 0; ch < nch; ++ch) out.at(i, j, ch) = f.at(sr, sc, ch);
      }
    }
  }
  return out;
}

struct ScaleEstimate {
  std::vector<double> weights;
  std::vector<double> scores;
  double scale = 1.0;
  bool low_confidence = false;
};

// Softmax of scores / temperature (max-subtracted) and the weighted scale.
inline ScaleEstimate weigh_scales(const ScaleBins& bins, std::vector<double> scores, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("weigh_scales: temperature must be positive");
  if (scores.size() != bins.values.size()) throw InvalidArgument("weigh_scales: one score per bin required");
  ScaleEstimate est;
  est.scores = std::move(scores);
  const double mx = *std::max_element(est.scores.begin(), est.scores.end());
  est.weights.resize(est.scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < est.scores.size(); ++i) {
    est.weights[i] = std::exp((est.scores[i] - mx) / temperature);
    z += est.weights[i];
  }
  est.scale = 0.0;
  for (std::size_t i = 0; i < est.weights.size(); ++i) {
    est.weights[i] /= z;
    est.scale += est.weights[i] * bins.values[i];
  }
  est.scale = std::clamp(est.scale, bins.values.front(), bins.values.back());
  return est;
}

namespace detail {

inline bool has_skeleton(const Grid2D& mask) {
  for (std::size_t i = 0; i < mask.cells(); ++i)
    if (mask.values()[i * mask.channels() + 1] > 0.5) return true;
  return false;
}

inline Grid2D skeleton_indicator(const Grid2D& mask) {
  Grid2D g(mask.height(), mask.width(), 1, mask.cell_size());
  for (std::size_t i = 0; i < mask.cells(); ++i) g.values()[i] = mask.values()[i * mask.channels() + 1] > 0.5 ? 1.0 : 0.0;
  return g;
}

}  // namespace detail

/// Significance of the best skeleton overlap of `bev` against `map` over
/// `rotations` rotations and all translations.
///
/// With map skeleton density rho, a placement that puts m BEV skeleton cells
/// inside the map and o of them on map skeleton scores
///   (o - rho m) / sqrt(rho (1 - rho) m),
/// the number of standard deviations above chance overlap. Placements with
/// fewer than one cell inside the map are ignored. Both arguments are 0/1
/// single-channel indicators.
inline double skeleton_significance(const Grid2D& map, const Grid2D& bev, int rotations, int workers = 1) {
  double rho = 0.0;
  for (double v : map.values()) rho += v;
  rho /= static_cast<double>(map.cells());
  if (rho <= 0.0 || rho >= 1.0) return 0.0;
  Grid2D support(map.height(), map.width(), 1, map.cell_size());
  std::fill(support.values().begin(), support.values().end(), 1.0);
  const ScoreVolume hit = score_volume(map, bev, rotations, workers);
  const ScoreVolume inside = score_volume(support, bev, rotations, workers);
  const double area = static_cast<double>(bev.cells());
  double best = 0.0;
  for (std::size_t k = 0; k < hit.scores.size(); ++k) {
    const double m = std::round(inside.scores[k] * area);
    if (m < 1.0) continue;
    const double o = std::round(hit.scores[k] * area);
    best = std::max(best, (o - rho * m) / std::sqrt(rho * (1.0 - rho) * m));
  }
  return best;
}

/// Scale scoring with a caller-supplied BEV skeleton per bin.
///
/// `skeleton_at(s)` returns the BEV skeleton mask at scale s (two channels).
/// Every bin is scored with skeleton_significance against the map skeleton;
/// weights are softmax(score / temperature) and the scale is their weighted
/// mean. Without any skeleton cell on either side the weights are uniform and
/// the estimate is flagged low-confidence.
template <class SkeletonAt>
ScaleEstimate score_scales_with(SkeletonAt&& skeleton_at, const SkeletonMask& f_map_s, const ScaleBins& bins,
                                int coarse_rotations = 8, double temperature = 0.05, int workers = 1) {
  if (!(temperature > 0.0)) throw InvalidArgument("score_scales: temperature must be positive");
  if (f_map_s.channels() != 2) throw InvalidArgument("score_scales: two-channel skeleton masks required");
  if (bins.values.empty()) throw InvalidArgument("score_scales: no bins");
  if (coarse_rotations < 1) throw InvalidArgument("score_scales: coarse_rotations must be >= 1");
  const std::size_t n = bins.values.size();
  auto low_confidence = [&] {
    ScaleEstimate est = weigh_scales(bins, std::vector<double>(n, 0.0), temperature);
    est.low_confidence = true;
    return est;
  };
  if (!detail::has_skeleton(f_map_s)) return low_confidence();
  const Grid2D map = detail::skeleton_indicator(f_map_s);
  std::vector<double> scores(n, 0.0);
  bool any = false;
  for (std::size_t k = 0; k < n; ++k) {
    const SkeletonMask g = skeleton_at(bins.values[k]);
    if (g.channels() != 2) throw InvalidArgument("score_scales: two-channel skeleton masks required");
    if (!detail::has_skeleton(g)) continue;
    any = true;
    scores[k] = skeleton_significance(map, detail::skeleton_indicator(g), coarse_rotations, workers);
  }
  if (!any) return low_confidence();
  return weigh_scales(bins, std::move(scores), temperature);
}

/// Correlation-based scale scoring: the BEV skeleton is resampled to every
/// bin with rescale_bev and scored as in score_scales_with.
inline ScaleEstimate score_scales(const SkeletonMask& f_bev_s, const SkeletonMask& f_map_s, const ScaleBins& bins,
                                  int coarse_rotations = 8, double temperature = 0.05, int workers = 1) {
  if (f_bev_s.channels() != 2) throw InvalidArgument("score_scales: two-channel skeleton masks required");
  return score_scales_with([&](double s) { return rescale_bev(f_bev_s, s); }, f_map_s, bins, coarse_rotations,
                           temperature, workers);
}

}  // namespace xmloc

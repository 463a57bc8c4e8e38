#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/grid.hpp"

namespace xmloc {

// Row-major binary raster, 0 or 1 per cell.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int h, int w) : height(h), width(w), bits(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t& at(int r, int c) { return bits[static_cast<std::size_t>(r) * width + c]; }
  std::uint8_t at(int r, int c) const { return bits[static_cast<std::size_t>(r) * width + c]; }
  // Zero outside the raster.
  std::uint8_t get(int r, int c) const {
    return (r < 0 || r >= height || c < 0 || c >= width) ? 0 : at(r, c);
  }
  std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

// Dilation with a (2r+1) x (2r+1) square.
inline BinaryMask dilate(const BinaryMask& in, int r) {
  if (r <= 0) return in;
  BinaryMask out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      std::uint8_t v = 0;
      for (int dy = -r; dy <= r && !v; ++dy)
        for (int dx = -r; dx <= r && !v; ++dx) v = in.get(y + dy, x + dx);
      out.at(y, x) = v;
    }
  return out;
}

/// Zhang-Suen thinning, iterated until neither sub-iteration removes a pixel.
///
/// Neighbours are numbered P2..P9 clockwise starting north. A pixel is removed
/// when 2 <= B <= 6, A == 1 and the sub-iteration specific products vanish
/// (P2*P4*P6 and P4*P6*P8 in the first pass, P2*P4*P8 and P2*P6*P8 in the
/// second). Cells outside the raster count as background.
inline BinaryMask zhang_suen_thin(BinaryMask img) {
  std::vector<std::size_t> removals;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      removals.clear();
      for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
          if (!img.at(r, c)) continue;
          const std::array<int, 8> n = {img.get(r - 1, c),     img.get(r - 1, c + 1), img.get(r, c + 1),
                                        img.get(r + 1, c + 1), img.get(r + 1, c),     img.get(r + 1, c - 1),
                                        img.get(r, c - 1),     img.get(r - 1, c - 1)};
          int b = 0;
          int a = 0;
          for (int k = 0; k < 8; ++k) {
            b += n[k];
            if (n[k] == 0 && n[(k + 1) % 8] == 1) ++a;
          }
          if (b < 2 || b > 6 || a != 1) continue;
          // n[0]=P2 (N), n[2]=P4 (E), n[4]=P6 (S), n[6]=P8 (W)
          const bool ok = pass == 0 ? (n[0] * n[2] * n[4] == 0 && n[2] * n[4] * n[6] == 0)
                                    : (n[0] * n[2] * n[6] == 0 && n[0] * n[4] * n[6] == 0);
          if (ok) removals.push_back(static_cast<std::size_t>(r) * img.width + c);
        }
      }
      for (auto i : removals) img.bits[i] = 0;
      if (!removals.empty()) changed = true;
    }
  }
  return img;
}

struct SobelResponse {
  int height = 0;
  int width = 0;
  std::vector<double> gx;
  std::vector<double> gy;
  std::vector<double> magnitude;
};

// 3x3 Sobel on a single-channel grid with replicated borders.
inline SobelResponse sobel(const Grid2D& img) {
  if (img.channels() != 1) throw InvalidArgument("sobel: single-channel input required");
  const int h = img.height();
  const int w = img.width();
  SobelResponse s{h, w, std::vector<double>(img.cells()), std::vector<double>(img.cells()),
                  std::vector<double>(img.cells())};
  auto px = [&](int r, int c) { return img.at(std::clamp(r, 0, h - 1), std::clamp(c, 0, w - 1)); };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double gx = (px(r - 1, c + 1) + 2.0 * px(r, c + 1) + px(r + 1, c + 1)) -
                        (px(r - 1, c - 1) + 2.0 * px(r, c - 1) + px(r + 1, c - 1));
      const double gy = (px(r + 1, c - 1) + 2.0 * px(r + 1, c) + px(r + 1, c + 1)) -
                        (px(r - 1, c - 1) + 2.0 * px(r - 1, c) + px(r - 1, c + 1));
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      s.gx[i] = gx;
      s.gy[i] = gy;
      s.magnitude[i] = std::hypot(gx, gy);
    }
  }
  return s;
}

/// Otsu's threshold over a 256-bin histogram spanning [min, max].
///
/// Values strictly greater than the returned threshold form the foreground.
/// A constant input yields its own value, so nothing is foreground.
inline double otsu_threshold(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("otsu_threshold: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return hi;
  constexpr int kBins = 256;
  const double width = (hi - lo) / kBins;
  std::array<double, kBins> hist{};
  for (double v : values) hist[std::min(kBins - 1, static_cast<int>((v - lo) / width))] += 1.0;
  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (int i = 0; i < kBins; ++i) sum_all += i * hist[i];
  double w0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  int best_k = 0;
  for (int k = 0; k < kBins - 1; ++k) {
    w0 += hist[k];
    sum0 += k * hist[k];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_k = k;
    }
  }
  return lo + (best_k + 1) * width;
}

}  // namespace xmloc

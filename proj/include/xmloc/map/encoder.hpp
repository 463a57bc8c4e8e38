#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "xmloc/bev/encoder.hpp"
#include "xmloc/core/error.hpp"
#include "xmloc/core/geometry.hpp"
#include "xmloc/core/grid.hpp"
#include "xmloc/image/image_io.hpp"
#include "xmloc/image/morphology.hpp"

namespace xmloc {

/// Square overhead raster as luminance in [0, 1]. Its ground sample distance is
/// unknown to the localizer.
class MapPatch {
 public:
  MapPatch() = default;
  explicit MapPatch(Grid2D luminance) : lum_(std::move(luminance)) {
    if (lum_.channels() != 1) throw InvalidArgument("MapPatch: single-channel luminance required");
    if (!lum_.square()) throw InputFormatError("MapPatch: patch must be square");
  }

  int size() const { return lum_.height(); }
  const Grid2D& luminance() const { return lum_; }
  double at(int r, int c) const { return lum_.at(r, c); }

 private:
  Grid2D lum_;
};

// Rec. 601 luminance with integer weights, so white maps to exactly 1.0.
inline Grid2D luminance_from_image(const Image8& img) {
  Grid2D g(img.height, img.width, 1);
  auto vals = g.values();
  for (std::size_t i = 0; i < g.cells(); ++i) {
    if (img.channels == 1) {
      vals[i] = img.data[i] / 255.0;
    } else {
      const int r = img.data[3 * i], gr = img.data[3 * i + 1], b = img.data[3 * i + 2];
      vals[i] = static_cast<double>(299 * r + 587 * gr + 114 * b) / 255000.0;
    }
  }
  return g;
}

inline Image8 image_from_luminance(const Grid2D& lum) {
  Image8 img(lum.width(), lum.height(), 1);
  for (std::size_t i = 0; i < lum.cells(); ++i)
    img.data[i] = static_cast<std::uint8_t>(std::lround(std::clamp(lum.values()[i], 0.0, 1.0) * 255.0));
  return img;
}

inline MapPatch load_map(const std::filesystem::path& path) {
  const Image8 img = read_image(path);
  if (img.width != img.height)
    throw InputFormatError(path.string() + ": map patch must be square, got " + std::to_string(img.width) + "x" +
                           std::to_string(img.height));
  return MapPatch(luminance_from_image(img));
}

namespace detail {

inline void check_stride(const MapPatch& m, int stride) {
  if (stride <= 0 || m.size() % stride != 0)
    throw InvalidArgument("map encoder: patch size " + std::to_string(m.size()) + " not divisible by stride " +
                          std::to_string(stride));
}

// Edge orientation bin (0, 45, 90, 135 degrees) of a gradient; the edge runs
// perpendicular to the gradient.
inline int edge_bin(double gx, double gy) {
  double deg = rad_to_deg(std::atan2(gy, gx)) + 90.0;
  deg = std::fmod(deg, 180.0);
  if (deg < 0.0) deg += 180.0;
  return static_cast<int>(std::lround(deg / 45.0)) % 4;
}

}  // namespace detail

/// Handcrafted map features pooled over stride x stride windows.
///
/// Channels: mean luminance, luminance std, mean Sobel magnitude, then
/// oriented edge energy for edges at 0, 45, 90 and 135 degrees (Sobel
/// magnitude hard-assigned to the nearest orientation, averaged over the
/// window), then zero-valued reserved channels. All channels are
/// standardized over every cell.
inline Grid2D map_features(const MapPatch& m, int stride, int channels = kFeatureChannels) {
  detail::check_stride(m, stride);
  if (channels < kFeatureChannels) throw InvalidArgument("map_features: at least 8 channels required");
  const int n = m.size() / stride;
  const SobelResponse s = sobel(m.luminance());
  Grid2D f(n, n, channels);
  const double area = static_cast<double>(stride) * stride;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double sum = 0.0, sum2 = 0.0, mag = 0.0;
      double bins[4] = {0.0, 0.0, 0.0, 0.0};
      for (int y = r * stride; y < (r + 1) * stride; ++y) {
        for (int x = c * stride; x < (c + 1) * stride; ++x) {
          const double l = m.at(y, x);
          sum += l;
          sum2 += l * l;
          const std::size_t i = static_cast<std::size_t>(y) * m.size() + x;
          mag += s.magnitude[i];
          if (s.magnitude[i] > 0.0) bins[detail::edge_bin(s.gx[i], s.gy[i])] += s.magnitude[i];
        }
      }
      const double mean = sum / area;
      f.at(r, c, 0) = mean;
      f.at(r, c, 1) = std::sqrt(std::max(0.0, sum2 / area - mean * mean));
      f.at(r, c, 2) = mag / area;
      for (int k = 0; k < 4; ++k) f.at(r, c, 3 + k) = bins[k] / area;
    }
  }
  std::vector<std::uint8_t> all(f.cells(), 1);
  standardize_channels(f, all);
  return f;
}

// 3x3 closing; the erosion treats cells outside the raster as set.
inline BinaryMask close3x3(const BinaryMask& in) {
  BinaryMask dil(in.height, in.width);
  for (int r = 0; r < in.height; ++r)
    for (int c = 0; c < in.width; ++c) {
      std::uint8_t v = 0;
      for (int dr = -1; dr <= 1 && !v; ++dr)
        for (int dc = -1; dc <= 1 && !v; ++dc) v = in.get(r + dr, c + dc);
      dil.at(r, c) = v;
    }
  BinaryMask out(in.height, in.width);
  for (int r = 0; r < in.height; ++r)
    for (int c = 0; c < in.width; ++c) {
      std::uint8_t v = 1;
      for (int dr = -1; dr <= 1 && v; ++dr)
        for (int dc = -1; dc <= 1 && v; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr >= 0 && rr < in.height && cc >= 0 && cc < in.width) v = dil.at(rr, cc);
        }
      out.at(r, c) = v;
    }
  return out;
}

/// Pixel-resolution edge skeleton: Sobel magnitude above Otsu's threshold,
/// closed with a 3x3 element so both flanks of a thin line merge, then thinned.
inline BinaryMask map_edge_skeleton(const MapPatch& m) {
  const SobelResponse s = sobel(m.luminance());
  const double t = otsu_threshold(s.magnitude);
  BinaryMask edges(m.size(), m.size());
  for (std::size_t i = 0; i < edges.bits.size(); ++i) edges.bits[i] = s.magnitude[i] > t && s.magnitude[i] > 1e-9;
  return zhang_suen_thin(close3x3(edges));
}

inline SkeletonMask map_skeleton(const MapPatch& m, int stride) {
  detail::check_stride(m, stride);
  const BinaryMask px = map_edge_skeleton(m);
  const int n = m.size() / stride;
  std::vector<std::uint8_t> pooled(static_cast<std::size_t>(n) * n, 0);
  for (int y = 0; y < m.size(); ++y)
    for (int x = 0; x < m.size(); ++x)
      if (px.at(y, x)) pooled[static_cast<std::size_t>(y / stride) * n + x / stride] = 1;
  return skeleton_from_binary(pooled, n, n, std::nullopt);
}

// Skeleton widened by `radius` cells, used as a matching tolerance.
inline SkeletonMask widen_skeleton(const SkeletonMask& m, int radius) {
  if (m.channels() != 2) throw InvalidArgument("widen_skeleton: two-channel skeleton mask required");
  if (radius < 0) throw InvalidArgument("widen_skeleton: radius must be >= 0");
  BinaryMask b(m.height(), m.width());
  for (std::size_t i = 0; i < m.cells(); ++i) b.bits[i] = m.values()[2 * i + 1] > 0.5;
  return skeleton_from_binary(dilate(b, radius).bits, m.height(), m.width(), m.cell_size());
}

}  // namespace xmloc

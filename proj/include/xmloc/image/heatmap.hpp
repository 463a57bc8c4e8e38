#pragma once

#include <algorithm>
#include <cmath>

#include "xmloc/core/geometry.hpp"
#include "xmloc/image/image_io.hpp"
#include "xmloc/match/probability.hpp"

namespace xmloc {

/// Max-over-rotations probability per cell as an RGB image, `upscale` pixels
/// per cell. Intensity is linear in probability relative to the peak; the
/// optional ground-truth cell is outlined in green.
inline Image8 probability_heatmap(const ProbabilityVolume& p, int upscale = 4, const Pose* gt = nullptr) {
  if (upscale < 1) throw InvalidArgument("probability_heatmap: upscale must be >= 1");
  const std::vector<double> m = max_over_rotations(p);
  const double peak = m.empty() ? 0.0 : *std::max_element(m.begin(), m.end());
  Image8 img(p.width * upscale, p.height * upscale, 3);
  for (int a = 0; a < p.height; ++a)
    for (int b = 0; b < p.width; ++b) {
      const double t = peak > 0.0 ? m[static_cast<std::size_t>(a) * p.width + b] / peak : 0.0;
      const auto hot = static_cast<std::uint8_t>(std::lround(255.0 * t));
      const auto warm = static_cast<std::uint8_t>(std::lround(255.0 * t * t));
      for (int y = 0; y < upscale; ++y)
        for (int x = 0; x < upscale; ++x) {
          img.at(a * upscale + y, b * upscale + x, 0) = hot;
          img.at(a * upscale + y, b * upscale + x, 1) = warm;
          img.at(a * upscale + y, b * upscale + x, 2) = 0;
        }
    }
  if (gt) {
    const long a = std::lround(gt->v()), b = std::lround(gt->u());
    if (a >= 0 && a < p.height && b >= 0 && b < p.width)
      for (int y = 0; y < upscale; ++y)
        for (int x = 0; x < upscale; ++x)
          if (y == 0 || x == 0 || y == upscale - 1 || x == upscale - 1)
            img.at(static_cast<int>(a) * upscale + y, static_cast<int>(b) * upscale + x, 1) = 255;
  }
  return img;
}

}  // namespace xmloc

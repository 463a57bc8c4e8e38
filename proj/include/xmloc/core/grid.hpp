#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xmloc/core/error.hpp"

namespace xmloc {

/// Dense H x W x C real grid, row-major (row, column, channel).
///
/// Used for BEV features, map features, skeleton masks and plain rasters.
/// cell_size is meters per cell when known; pixel-space grids of unknown
/// ground resolution leave it empty.
class Grid2D {
 public:
  Grid2D() = default;

  Grid2D(int height, int width, int channels, std::optional<double> cell_size = std::nullopt)
      : height_(height), width_(width), channels_(channels), cell_size_(cell_size) {
    check_dims();
    values_.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
  }

  Grid2D(int height, int width, int channels, std::vector<double> values,
         std::optional<double> cell_size = std::nullopt)
      : height_(height), width_(width), channels_(channels), cell_size_(cell_size),
        values_(std::move(values)) {
    check_dims();
    if (values_.size() != static_cast<std::size_t>(height) * width * channels)
      throw InvalidArgument("Grid2D: value count does not match dimensions");
    for (double x : values_)
      if (!std::isfinite(x)) throw InvalidArgument("Grid2D: non-finite value");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return values_.size(); }
  std::size_t cells() const { return static_cast<std::size_t>(height_) * width_; }
  bool square() const { return height_ == width_; }
  const std::optional<double>& cell_size() const { return cell_size_; }
  void set_cell_size(std::optional<double> cs) { cell_size_ = cs; }

  std::size_t index(int r, int c, int ch = 0) const {
    return (static_cast<std::size_t>(r) * width_ + c) * channels_ + ch;
  }
  bool contains(int r, int c) const { return r >= 0 && r < height_ && c >= 0 && c < width_; }

  double& at(int r, int c, int ch = 0) { return values_[index(r, c, ch)]; }
  double at(int r, int c, int ch = 0) const { return values_[index(r, c, ch)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  // Single channel copy as an H x W x 1 grid.
  Grid2D channel(int ch) const {
    if (ch < 0 || ch >= channels_) throw InvalidArgument("Grid2D::channel: index out of range");
    Grid2D out(height_, width_, 1, cell_size_);
    for (std::size_t i = 0; i < cells(); ++i) out.values_[i] = values_[i * channels_ + ch];
    return out;
  }

  bool same_shape(const Grid2D& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  void check_dims() const {
    if (height_ <= 0 || width_ <= 0 || channels_ <= 0)
      throw InvalidArgument("Grid2D: dimensions must be positive");
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::optional<double> cell_size_;
  std::vector<double> values_;
};

// Two-channel skeleton probability grid; channel 1 is the skeleton
// probability, channel 0 its complement.
using SkeletonMask = Grid2D;

inline constexpr double kSkeletonEps = 1e-4;

// Builds a skeleton mask from a binary indicator (nonzero = skeleton),
// clamping probabilities to [eps, 1 - eps].
inline SkeletonMask skeleton_from_binary(const std::vector<unsigned char>& binary, int height,
                                         int width, std::optional<double> cell_size,
                                         double eps = kSkeletonEps) {
  SkeletonMask m(height, width, 2, cell_size);
  for (std::size_t i = 0; i < m.cells(); ++i) {
    const double p = binary[i] ? 1.0 - eps : eps;
    m.values()[2 * i + 1] = p;
    m.values()[2 * i] = 1.0 - p;
  }
  return m;
}

}  // namespace xmloc

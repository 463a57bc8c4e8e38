#pragma once

#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/grid.hpp"

namespace xmloc {

/// Reorders map feature channels so channel c of the result faces BEV
/// channel c during matching. pairing[c] is the source map channel, or -1 for
/// a zero channel. Missing trailing entries are -1.
inline Grid2D pair_channels(const Grid2D& f_map, const std::vector<int>& pairing, int channels) {
  if (channels < 1) throw InvalidArgument("pair_channels: channels must be >= 1");
  if (static_cast<int>(pairing.size()) > channels) throw InvalidArgument("pair_channels: more pairs than channels");
  for (int src : pairing)
    if (src < -1 || src >= f_map.channels()) throw InvalidArgument("pair_channels: source channel out of range");
  Grid2D out(f_map.height(), f_map.width(), channels, f_map.cell_size());
  const int nin = f_map.channels();
  for (std::size_t i = 0; i < f_map.cells(); ++i)
    for (int c = 0; c < static_cast<int>(pairing.size()); ++c)
      if (pairing[c] >= 0) out.values()[i * channels + c] = f_map.values()[i * nin + pairing[c]];
  return out;
}

}  // namespace xmloc

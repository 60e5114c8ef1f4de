#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "edn/maps.hpp"

namespace edn {

inline constexpr double kNoSite = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

// Exact Euclidean distance from every pixel to the nearest site pixel
// (non-zero entry of `sites`), with the flat index of that site. Sites have
// distance 0 and point at themselves. Without any site every distance is
// kNoSite and every index kNoIndex.
struct DistanceField {
  std::size_t h = 0, w = 0;
  std::vector<std::int64_t> squared;  // -1 where no site exists
  std::vector<double> distance;
  std::vector<std::size_t> nearest;
};

// Two-pass separable transform: per-column nearest site, then the lower
// envelope of parabolas along each row.
DistanceField distance_to_sites(std::span<const std::uint8_t> sites, std::size_t h, std::size_t w);

// Distance of each foreground pixel to the nearest background pixel;
// background pixels are 0. A mask without background yields kNoSite for
// every foreground pixel.
std::vector<double> exact_edt(const GtMask& g);

}  // namespace edn

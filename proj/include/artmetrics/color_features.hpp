#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include "artmetrics/image_io.hpp"

namespace artmetrics {

struct ColorShares {
  double redpct = 0.0;
  double bluepct = 0.0;
};

// Half-degree hue bins 0..179; gray pixels have no bin.
inline std::optional<int> hue_bin(const HsvPixel& px) {
  if (!px.hue) return std::nullopt;
  const int bin = static_cast<int>(std::floor(*px.hue / 2.0));
  return std::clamp(bin, 0, 179);
}

inline bool is_red_bin(int bin) { return (bin >= 0 && bin <= 14) || (bin >= 165 && bin <= 179); }
inline bool is_blue_bin(int bin) { return bin >= 105 && bin <= 134; }

/// Shares of red and blue pixels. Undefined-hue pixels count toward the total only.
inline ColorShares red_blue_pct(const PixelImage& img) {
  std::size_t red = 0;
  std::size_t blue = 0;
  for (const Rgb& p : img.pixels) {
    const auto bin = hue_bin(to_hsv(p));
    if (!bin) continue;
    if (is_red_bin(*bin)) ++red;
    else if (is_blue_bin(*bin)) ++blue;
  }
  const auto total = static_cast<double>(img.pixels.size());
  if (total == 0.0) return {};
  return {static_cast<double>(red) / total, static_cast<double>(blue) / total};
}

}  // namespace artmetrics

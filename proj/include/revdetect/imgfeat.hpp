#pragma once

#include <vector>

#include "revdetect/image.hpp"

namespace revdetect {

/// H, S, V per pixel, each on a 0..255 scale (H = degrees * 255 / 360).
struct HsvImage {
  int width = 0;
  int height = 0;
  std::vector<float> h, s, v;
};

HsvImage rgb_to_hsv(const ImageMatrix& img);

struct ColorFeatures {
  double bri = 0;  // mean V
  double sat = 0;  // mean S
  double con = 0;  // population std of V
  double cla = 0;  // fraction with V/255 > 0.7
  double war = 0;  // fraction with H < 60 or H > 220 (byte hue)
  double col = 0;  // Hasler-Susstrunk colorfulness
};

ColorFeatures color_features(const HsvImage& hsv, const ImageMatrix& rgb);

/// Convenience: converts and scores in one call.
ColorFeatures color_features(const ImageMatrix& rgb);

}  // namespace revdetect

#pragma once

#include <cstdint>
#include <vector>

#include "revdetect/image.hpp"

namespace revdetect {

/// Per-pixel saliency in [0,1] at source resolution.
struct SaliencyMap {
  Plane map;
  bool degenerate = false;  // constant input: map is all zero
};

/// Spectral-residual saliency computed on a 64x64 grid and upsampled.
SaliencyMap saliency_map(const ImageMatrix& img);

struct FigureGroundMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> figure;  // 1 = figure, 0 = ground
  double centroid_x = 0;             // pixel-centre coordinates
  double centroid_y = 0;
  std::size_t figure_count = 0;

  std::uint8_t at(int x, int y) const { return figure[static_cast<std::size_t>(y) * width + x]; }

  /// Builds a mask (and its centroid) from explicit bits.
  static FigureGroundMask from_bits(int width, int height, std::vector<std::uint8_t> bits);
};

/// Otsu threshold over a 256-bin saliency histogram.
int otsu_threshold(const Plane& values01);

/// Throws Error("no salient region") for a degenerate map.
FigureGroundMask figure_ground(const ImageMatrix& img, const SaliencyMap& sal);

struct FigureGroundFeatures {
  double sd = 0;  // |#figure - #ground| / #total
  double cd = 0;  // distance between mean RGB of figure and ground
  double td = 0;  // |edge density(figure) - edge density(ground)|
};

inline constexpr double kSobelEdgeThreshold = 100.0;

FigureGroundFeatures figure_ground_features(const ImageMatrix& img, const FigureGroundMask& mask);

struct CompositionFeatures {
  double dd = 0;
  double rot = 0;
  double hpvb = 0;
  double vpvb = 0;
  double hcvb = 0;
  double vcvb = 0;
};

CompositionFeatures composition_features(const ImageMatrix& img, const FigureGroundMask& mask);

/// Minimum L1 distance from (x, y) to either image diagonal.
double diagonal_manhattan_distance(double x, double y, int width, int height);
/// Minimum Euclidean distance from (x, y) to a rule-of-thirds intersection.
double thirds_distance(double x, double y, int width, int height);

// Building blocks exposed for testing.
namespace detail {
Plane resize_area(const Plane& src, int width, int height);
Plane resize_bilinear(const Plane& src, int width, int height);
Plane gaussian_blur(const Plane& src, double sigma);
Plane sobel_magnitude(const Plane& gray);
}  // namespace detail

}  // namespace revdetect

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace revdetect {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster, row-major. At least 8x8.
class ImageMatrix {
 public:
  static constexpr int kMinSide = 8;

  ImageMatrix(int width, int height, Rgb fill = {});
  ImageMatrix(int width, int height, std::vector<Rgb> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }

  const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const Rgb> pixels() const { return pixels_; }
  std::span<Rgb> pixels() { return pixels_; }

  ImageMatrix flipped_horizontal() const;  // left-right
  ImageMatrix flipped_vertical() const;    // top-bottom
  ImageMatrix rotated_180() const;

 private:
  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

/// Single-channel float plane, row-major.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// BT.601 luma in [0,255].
Plane grayscale(const ImageMatrix& img);

/// Decodes JPEG/PNG (any channel count) to RGB.
ImageMatrix load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const ImageMatrix& img);
/// Writes a [0,1] plane as an 8-bit grayscale PNG.
void save_plane_png(const std::filesystem::path& path, const Plane& plane);

}  // namespace revdetect

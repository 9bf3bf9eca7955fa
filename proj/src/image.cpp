#include "revdetect/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "revdetect/error.hpp"

namespace revdetect {

ImageMatrix::ImageMatrix(int width, int height, Rgb fill)
    : ImageMatrix(width, height,
                  std::vector<Rgb>(static_cast<std::size_t>(std::max(width, 0)) *
                                       static_cast<std::size_t>(std::max(height, 0)),
                                   fill)) {}

ImageMatrix::ImageMatrix(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < kMinSide || height < kMinSide)
    throw Error("image must be at least 8x8, got " + std::to_string(width) + "x" +
                std::to_string(height));
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("pixel buffer size does not match image dimensions");
}

ImageMatrix ImageMatrix::flipped_horizontal() const {
  ImageMatrix out(width_, height_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out.at(width_ - 1 - x, y) = at(x, y);
  return out;
}

ImageMatrix ImageMatrix::flipped_vertical() const {
  ImageMatrix out(width_, height_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out.at(x, height_ - 1 - y) = at(x, y);
  return out;
}

ImageMatrix ImageMatrix::rotated_180() const {
  ImageMatrix out(width_, height_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out.at(width_ - 1 - x, height_ - 1 - y) = at(x, y);
  return out;
}

Plane grayscale(const ImageMatrix& img) {
  Plane p(img.width(), img.height());
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i)
    p.values[i] = 0.299 * px[i].r + 0.587 * px[i].g + 0.114 * px[i].b;
  return p;
}

ImageMatrix load_image(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty()) throw Error("cannot decode image: " + path.string());
  std::vector<Rgb> px(static_cast<std::size_t>(m.rows) * m.cols);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < m.cols; ++x)
      px[static_cast<std::size_t>(y) * m.cols + x] = Rgb{row[x][2], row[x][1], row[x][0]};
  }
  return ImageMatrix(m.cols, m.rows, std::move(px));
}

void save_image(const std::filesystem::path& path, const ImageMatrix& img) {
  cv::Mat m(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      const Rgb& p = img.at(x, y);
      row[x] = cv::Vec3b(p.b, p.g, p.r);
    }
  }
  if (!cv::imwrite(path.string(), m)) throw Error("cannot write image: " + path.string());
}

void save_plane_png(const std::filesystem::path& path, const Plane& plane) {
  cv::Mat m(plane.height, plane.width, CV_8UC1);
  for (int y = 0; y < plane.height; ++y)
    for (int x = 0; x < plane.width; ++x)
      m.at<std::uint8_t>(y, x) =
          static_cast<std::uint8_t>(std::lround(std::clamp(plane.at(x, y), 0.0, 1.0) * 255.0));
  if (!cv::imwrite(path.string(), m)) throw Error("cannot write image: " + path.string());
}

}  // namespace revdetect

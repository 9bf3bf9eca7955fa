#include "revdetect/composition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "revdetect/error.hpp"

namespace revdetect {

namespace {

constexpr int kGrid = 64;
constexpr double kBlurFraction = 0.025;

// Planes are row-major doubles, so a CV_64F header can share their storage.
cv::Mat view(const Plane& p) {
  return cv::Mat(p.height, p.width, CV_64F, const_cast<double*>(p.values.data()));
}

Plane from_mat(const cv::Mat& m) {
  Plane out(m.cols, m.rows);
  cv::Mat dst = view(out);
  m.convertTo(dst, CV_64F);
  return out;
}

}  // namespace

namespace detail {

Plane resize_area(const Plane& src, int width, int height) {
  cv::Mat out;
  cv::resize(view(src), out, cv::Size(width, height), 0, 0, cv::INTER_AREA);
  return from_mat(out);
}

Plane resize_bilinear(const Plane& src, int width, int height) {
  cv::Mat out;
  cv::resize(view(src), out, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  return from_mat(out);
}

Plane gaussian_blur(const Plane& src, double sigma) {
  if (sigma <= 0) return src;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  cv::Mat out;
  cv::GaussianBlur(view(src), out, cv::Size(2 * radius + 1, 2 * radius + 1), sigma, sigma,
                   cv::BORDER_REFLECT_101);
  return from_mat(out);
}

Plane sobel_magnitude(const Plane& g) {
  cv::Mat gx, gy, mag;
  cv::Sobel(view(g), gx, CV_64F, 1, 0, 3, 1, 0, cv::BORDER_REPLICATE);
  cv::Sobel(view(g), gy, CV_64F, 0, 1, 3, 1, 0, cv::BORDER_REPLICATE);
  cv::magnitude(gx, gy, mag);
  return from_mat(mag);
}

}  // namespace detail

SaliencyMap saliency_map(const ImageMatrix& img) {
  const Plane gray = grayscale(img);
  SaliencyMap out{Plane(img.width(), img.height(), 0.0), true};

  auto [lo, hi] = std::minmax_element(gray.values.begin(), gray.values.end());
  if (*hi - *lo < 1e-9) return out;

  const Plane small = detail::resize_area(gray, kGrid, kGrid);
  cv::Mat spec;
  cv::dft(view(small), spec, cv::DFT_COMPLEX_OUTPUT);
  cv::Mat parts[2];
  cv::split(spec, parts);
  cv::Mat amp, phase;
  cv::cartToPolar(parts[0], parts[1], amp, phase);

  // floor relative to the peak so exact spectral zeros (synthetic shapes)
  // don't dominate the local mean and leave a periodic comb in the residual
  double peak = 0;
  cv::minMaxLoc(amp, nullptr, &peak);
  cv::Mat log_amp;
  cv::log(amp + 1e-4 * peak, log_amp);

  // residual against the 3x3 local mean of the (periodic) log spectrum
  cv::Mat padded, local_mean, residual;
  cv::copyMakeBorder(log_amp, padded, 1, 1, 1, 1, cv::BORDER_WRAP);
  cv::blur(padded, local_mean, cv::Size(3, 3));
  cv::exp(log_amp - local_mean(cv::Rect(1, 1, kGrid, kGrid)), residual);
  cv::polarToCart(residual, phase, parts[0], parts[1]);
  cv::merge(parts, 2, spec);
  cv::Mat back;
  cv::dft(spec, back, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_COMPLEX_OUTPUT);
  cv::split(back, parts);
  cv::Mat energy;
  cv::magnitude(parts[0], parts[1], energy);
  energy = energy.mul(energy);

  Plane sal = detail::gaussian_blur(from_mat(energy), kBlurFraction * kGrid);

  auto [smin, smax] = std::minmax_element(sal.values.begin(), sal.values.end());
  const double range = *smax - *smin;
  if (!(range > 1e-300)) return out;
  const double base = *smin;
  for (double& v : sal.values) v = (v - base) / range;

  out.map = detail::resize_bilinear(sal, img.width(), img.height());
  for (double& v : out.map.values) v = std::clamp(v, 0.0, 1.0);
  out.degenerate = false;
  return out;
}

int otsu_threshold(const Plane& values01) {
  std::array<double, 256> hist{};
  for (double v : values01.values) {
    int b = static_cast<int>(std::floor(std::clamp(v, 0.0, 1.0) * 256.0));
    ++hist[std::min(b, 255)];
  }
  const double total = static_cast<double>(values01.values.size());
  double sum_all = 0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

  double w0 = 0, sum0 = 0, best = -1;
  int best_t = 0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

FigureGroundMask FigureGroundMask::from_bits(int width, int height, std::vector<std::uint8_t> bits) {
  if (bits.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("mask size does not match dimensions");
  FigureGroundMask m;
  m.width = width;
  m.height = height;
  m.figure = std::move(bits);
  double sx = 0, sy = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (m.at(x, y)) {
        ++m.figure_count;
        sx += x + 0.5;
        sy += y + 0.5;
      }
  if (m.figure_count > 0) {
    m.centroid_x = sx / static_cast<double>(m.figure_count);
    m.centroid_y = sy / static_cast<double>(m.figure_count);
  }
  return m;
}

FigureGroundMask figure_ground(const ImageMatrix& img, const SaliencyMap& sal) {
  if (sal.degenerate) throw Error("no salient region");
  if (sal.map.width != img.width() || sal.map.height != img.height())
    throw Error("saliency map and image differ in size");
  const int t = otsu_threshold(sal.map);
  std::vector<std::uint8_t> bits(sal.map.values.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    int b = std::min(255, static_cast<int>(std::floor(std::clamp(sal.map.values[i], 0.0, 1.0) * 256.0)));
    bits[i] = b > t ? 1 : 0;
  }
  auto mask = FigureGroundMask::from_bits(img.width(), img.height(), std::move(bits));
  if (mask.figure_count == 0) throw Error("no salient region");
  return mask;
}

namespace {

void require_nondegenerate(const ImageMatrix& img, const FigureGroundMask& mask) {
  if (mask.width != img.width() || mask.height != img.height())
    throw Error("mask and image differ in size");
  if (mask.figure_count == 0) throw Error("figure region is empty");
  if (mask.figure_count == mask.figure.size()) throw Error("ground region is empty");
}

}  // namespace

FigureGroundFeatures figure_ground_features(const ImageMatrix& img, const FigureGroundMask& mask) {
  require_nondegenerate(img, mask);
  const double total = static_cast<double>(mask.figure.size());
  const double nf = static_cast<double>(mask.figure_count);
  const double ng = total - nf;

  std::array<double, 3> fsum{}, gsum{};
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    auto& acc = mask.figure[i] ? fsum : gsum;
    acc[0] += px[i].r;
    acc[1] += px[i].g;
    acc[2] += px[i].b;
  }
  double cd2 = 0;
  for (int c = 0; c < 3; ++c) {
    double d = fsum[c] / nf - gsum[c] / ng;
    cd2 += d * d;
  }

  const Plane mag = detail::sobel_magnitude(grayscale(img));
  double fe = 0, ge = 0;
  for (std::size_t i = 0; i < mag.values.size(); ++i)
    if (mag.values[i] > kSobelEdgeThreshold) (mask.figure[i] ? fe : ge) += 1;

  FigureGroundFeatures f;
  f.sd = std::abs(nf - ng) / total;
  f.cd = std::sqrt(cd2);
  f.td = std::abs(fe / nf - ge / ng);
  return f;
}

double diagonal_manhattan_distance(double x, double y, int width, int height) {
  const double w = width, h = height;
  const double norm = std::max(w, h);
  // main diagonal (0,0)-(w,h): h*x - w*y = 0; anti-diagonal (w,0)-(0,h): h*x + w*y - w*h = 0
  const double d1 = std::abs(h * x - w * y) / norm;
  const double d2 = std::abs(h * x + w * y - w * h) / norm;
  return std::min(d1, d2);
}

double thirds_distance(double x, double y, int width, int height) {
  double best = std::numeric_limits<double>::infinity();
  for (double fx : {1.0 / 3.0, 2.0 / 3.0})
    for (double fy : {1.0 / 3.0, 2.0 / 3.0})
      best = std::min(best, std::hypot(x - fx * width, y - fy * height));
  return best;
}

CompositionFeatures composition_features(const ImageMatrix& img, const FigureGroundMask& mask) {
  if (mask.width != img.width() || mask.height != img.height())
    throw Error("mask and image differ in size");
  if (mask.figure_count == 0) throw Error("figure region is empty");
  const int w = img.width(), h = img.height();

  CompositionFeatures f;
  f.dd = -diagonal_manhattan_distance(mask.centroid_x, mask.centroid_y, w, h);
  f.rot = -thirds_distance(mask.centroid_x, mask.centroid_y, w, h);

  constexpr double kMaxRgbDistance = 441.6729559300637;  // sqrt(3 * 255^2)
  auto rgb_dist = [](const Rgb& a, const Rgb& b) {
    double dr = static_cast<double>(a.r) - b.r, dg = static_cast<double>(a.g) - b.g,
           db = static_cast<double>(a.b) - b.b;
    return std::sqrt(dr * dr + dg * dg + db * db);
  };

  // top-bottom pairs; an odd middle row has no partner
  {
    double mask_diff = 0, color = 0;
    const int half = h / 2;
    for (int y = 0; y < half; ++y)
      for (int x = 0; x < w; ++x) {
        mask_diff += std::abs(mask.at(x, y) - mask.at(x, h - 1 - y));
        color += rgb_dist(img.at(x, y), img.at(x, h - 1 - y));
      }
    const double pairs = static_cast<double>(half) * w;
    f.hpvb = -100.0 * mask_diff / pairs;
    f.hcvb = -color / pairs / kMaxRgbDistance;
  }
  // left-right pairs
  {
    double mask_diff = 0, color = 0;
    const int half = w / 2;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < half; ++x) {
        mask_diff += std::abs(mask.at(x, y) - mask.at(w - 1 - x, y));
        color += rgb_dist(img.at(x, y), img.at(w - 1 - x, y));
      }
    const double pairs = static_cast<double>(half) * h;
    f.vpvb = -100.0 * mask_diff / pairs;
    f.vcvb = -color / pairs / kMaxRgbDistance;
  }
  return f;
}

}  // namespace revdetect

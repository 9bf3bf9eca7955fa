#include "revdetect/imgfeat.hpp"

#include <algorithm>
#include <cmath>

#include "revdetect/error.hpp"

namespace revdetect {

HsvImage rgb_to_hsv(const ImageMatrix& img) {
  HsvImage out;
  out.width = img.width();
  out.height = img.height();
  const std::size_t n = img.size();
  out.h.resize(n);
  out.s.resize(n);
  out.v.resize(n);
  auto px = img.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    const int r = px[i].r, g = px[i].g, b = px[i].b;
    const int mx = std::max({r, g, b});
    const int mn = std::min({r, g, b});
    const int delta = mx - mn;
    double hue_deg = 0.0;
    if (delta > 0) {
      if (mx == r)
        hue_deg = 60.0 * static_cast<double>(g - b) / delta;
      else if (mx == g)
        hue_deg = 60.0 * (2.0 + static_cast<double>(b - r) / delta);
      else
        hue_deg = 60.0 * (4.0 + static_cast<double>(r - g) / delta);
      if (hue_deg < 0) hue_deg += 360.0;
    }
    out.h[i] = static_cast<float>(hue_deg * 255.0 / 360.0);
    out.s[i] = mx == 0 ? 0.0f : static_cast<float>(255.0 * delta / mx);
    out.v[i] = static_cast<float>(mx);
  }
  return out;
}

ColorFeatures color_features(const HsvImage& hsv, const ImageMatrix& rgb) {
  const std::size_t n = hsv.v.size();
  if (n == 0 || rgb.size() != n) throw Error("color_features: HSV and RGB images differ in size");

  double sum_v = 0, sum_s = 0;
  std::size_t clear = 0, warm = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_v += hsv.v[i];
    sum_s += hsv.s[i];
    if (hsv.v[i] / 255.0 > 0.7) ++clear;
    if (hsv.h[i] < 60.0f || hsv.h[i] > 220.0f) ++warm;
  }
  const double dn = static_cast<double>(n);
  ColorFeatures f;
  f.bri = sum_v / dn;
  f.sat = sum_s / dn;
  double ss = 0;
  for (float v : hsv.v) ss += (v - f.bri) * (v - f.bri);
  f.con = std::sqrt(ss / dn);
  f.cla = static_cast<double>(clear) / dn;
  f.war = static_cast<double>(warm) / dn;

  // Hasler & Susstrunk opponent-channel colorfulness
  double m_rg = 0, m_yb = 0;
  auto px = rgb.pixels();
  for (auto& p : px) {
    m_rg += static_cast<double>(p.r) - p.g;
    m_yb += 0.5 * (static_cast<double>(p.r) + p.g) - p.b;
  }
  m_rg /= dn;
  m_yb /= dn;
  double v_rg = 0, v_yb = 0;
  for (auto& p : px) {
    double rg = static_cast<double>(p.r) - p.g - m_rg;
    double yb = 0.5 * (static_cast<double>(p.r) + p.g) - p.b - m_yb;
    v_rg += rg * rg;
    v_yb += yb * yb;
  }
  v_rg /= dn;
  v_yb /= dn;
  f.col = std::sqrt(v_rg + v_yb) + 0.3 * std::sqrt(m_rg * m_rg + m_yb * m_yb);
  return f;
}

ColorFeatures color_features(const ImageMatrix& rgb) { return color_features(rgb_to_hsv(rgb), rgb); }

}  // namespace revdetect

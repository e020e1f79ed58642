#include "crackdet/enhance.hpp"

#include <algorithm>
#include <array>

namespace crackdet {

GrayImage to_grayscale(const RasterImage& image) {
  GrayImage out(image.width(), image.height());
  const std::span<const Rgb> src = image.pixels();
  const std::span<std::uint8_t> dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    // Exact decimal weights in hundredths; +50 rounds half up.
    const int weighted = 30 * src[i].r + 59 * src[i].g + 11 * src[i].b;
    dst[i] = static_cast<std::uint8_t>((weighted + 50) / 100);
  }
  return out;
}

StretchResult stretch_contrast(const GrayImage& image, const StretchParams& params) {
  if (!(params.low_saturation >= 0.0 && params.low_saturation < 0.5) ||
      !(params.high_saturation >= 0.0 && params.high_saturation < 0.5) ||
      params.low_saturation + params.high_saturation >= 1.0) {
    throw std::invalid_argument("stretch saturations must lie in [0, 0.5)");
  }
  if (image.empty()) throw std::domain_error("stretch_contrast: empty image");

  const Histogram hist = histogram(image);
  const int f_low = percentile_intensity(hist, params.low_saturation);
  const int f_high = percentile_intensity(hist, 1.0 - params.high_saturation);

  StretchResult result{GrayImage(image.width(), image.height()), f_high == f_low,
                       f_low, f_high};
  if (result.degenerate) return result;

  // 255 * (v - f_low) / (f_high - f_low), rounded half up, exact in integers.
  const int range = f_high - f_low;
  std::array<std::uint8_t, 256> lut;
  for (int v = 0; v < 256; ++v) {
    const int p = std::clamp(v, f_low, f_high) - f_low;
    lut[v] = static_cast<std::uint8_t>((510 * p + range) / (2 * range));
  }

  const std::span<const std::uint8_t> src = image.pixels();
  const std::span<std::uint8_t> dst = result.image.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lut[src[i]];
  return result;
}

}  // namespace crackdet

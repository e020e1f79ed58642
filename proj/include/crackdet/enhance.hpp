#pragma once

#include "crackdet/image.hpp"

namespace crackdet {

/// Percentile saturation fractions for contrast stretching.
struct StretchParams {
  double low_saturation = 0.01;
  double high_saturation = 0.01;
};

struct StretchResult {
  GrayImage image;
  bool degenerate = false;  // input had no usable intensity range; output is all zeros
  int low_cut = 0;          // intensities at or below map to 0
  int high_cut = 255;       // intensities at or above map to 255
};

/// Weighted luminance: round-half-up of 0.3 r + 0.59 g + 0.11 b.
GrayImage to_grayscale(const RasterImage& image);

/// Linear rescale of the percentile-clipped range onto [0, 255], rounding
/// half up. A constant (or fully saturated) input maps to all zeros with the
/// degenerate flag set.
StretchResult stretch_contrast(const GrayImage& image, const StretchParams& params = {});

}  // namespace crackdet

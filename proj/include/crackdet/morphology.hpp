#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "crackdet/image.hpp"

namespace crackdet {

/// Hit-and-miss mask pair over a 3x3 neighborhood. Cells in neither mask are
/// don't-care. Indexed [dy+1][dx+1] with y down, x right.
struct StructuringElementPair {
  std::array<std::array<bool, 3>, 3> hit{};
  std::array<std::array<bool, 3>, 3> miss{};

  /// Builds from two 9-character row-major patterns ('1' marks a cell).
  static StructuringElementPair from_patterns(const char* hit_pattern,
                                              const char* miss_pattern);

  /// Same element rotated 90 degrees clockwise.
  StructuringElementPair rotated90() const;
};

/// The eight sequential-thinning elements: an edge element (miss = top row,
/// hit = bottom row + center) and a corner element (hit = {center, W, S},
/// miss = {N, NE, E}), each in four clockwise rotations, interleaved
/// edge0, corner0, edge90, corner90, edge180, corner180, edge270, corner270.
const std::array<StructuringElementPair, 8>& thinning_elements();

struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;  // row-major; 0 = background
  int component_count = 0;

  std::int32_t at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
};

struct ThinResult {
  BinaryImage skeleton;
  int passes = 0;
};

/// Window median with replicate border padding; window side is 2*radius + 1.
GrayImage median_filter(const GrayImage& image, int radius = 1);

/// Median filter on a 0/1 raster, i.e. window majority vote.
BinaryImage majority_filter(const BinaryImage& mask, int radius = 1);

/// Pattern detector: true where every hit cell lies on foreground and every
/// miss cell on background. Pixels outside the image count as background.
BinaryImage hit_or_miss(const BinaryImage& mask, const StructuringElementPair& se);

/// One thinning step: mask minus its hit-or-miss matches.
BinaryImage thin_once(const BinaryImage& mask, const StructuringElementPair& se);

/// Applies thin_once with each of the eight thinning elements in sequence.
BinaryImage thin_pass(const BinaryImage& mask);

/// Repeats thin_pass until a pass changes nothing (the returned pass count
/// includes the confirming pass) or max_passes is reached.
ThinResult thin_to_convergence(const BinaryImage& mask, int max_passes = 1000);

/// Turns background not reachable from the border (4-connected) into
/// foreground.
BinaryImage fill_holes(const BinaryImage& mask);

/// Labels foreground components 1..component_count in raster-scan
/// first-encounter order. Connectivity must be 4 or 8.
LabelImage connected_components(const BinaryImage& mask, int connectivity = 8);

BinaryImage remove_small_components(const BinaryImage& mask, std::int64_t min_area,
                                    int connectivity = 8);

/// Components minus holes, 8-connected foreground / 4-connected background,
/// via 2x2 quad pattern counts.
int euler_number(const BinaryImage& mask);

/// Chebyshev-ball dilation (square window of side 2*radius + 1).
BinaryImage box_dilate(const BinaryImage& mask, int radius);

}  // namespace crackdet

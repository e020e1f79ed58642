#pragma once

#include <utility>
#include <vector>

#include "crackdet/image.hpp"

namespace crackdet {

enum class ThresholdKind { Fixed, Otsu, Ittt };

struct ThresholdStrategy {
  ThresholdKind kind = ThresholdKind::Otsu;
  int fixed_threshold = 128;
  int ittt_epsilon = 1;          // gray levels
  int ittt_max_iterations = 50;

  static ThresholdStrategy fixed(int t) {
    return {ThresholdKind::Fixed, t, 1, 50};
  }
  static ThresholdStrategy otsu() { return {}; }
  static ThresholdStrategy ittt(int epsilon = 1, int max_iterations = 50) {
    return {ThresholdKind::Ittt, 128, epsilon, max_iterations};
  }
};

/// Provenance of a chosen threshold.
struct ThresholdOutcome {
  int threshold = 0;
  int iterations = 1;  // 1 for fixed and otsu
  bool converged = true;
};

/// Crack-as-foreground mask: true where intensity <= t (equality goes to the
/// dark class).
BinaryImage threshold_fixed(const GrayImage& image, int t);

/// Between-class-variance maximizer over t in [0, 254], class 0 = intensities
/// <= t, ties broken toward the smallest t. The scan compares exact integer
/// rationals, so the tie-break never depends on floating-point noise.
ThresholdOutcome otsu_threshold(const Histogram& hist);

/// Iterative tri-class refinement: repeated Otsu over the region strictly
/// between the two class means, until the threshold moves by at most epsilon
/// or the region can no longer be split. If `trace` is non-null it receives
/// every computed threshold, starting with the full-histogram Otsu value.
ThresholdOutcome ittt_threshold(const GrayImage& image, int epsilon = 1,
                                int max_iterations = 50,
                                std::vector<int>* trace = nullptr);

std::pair<BinaryImage, ThresholdOutcome> binarize(const GrayImage& image,
                                                  const ThresholdStrategy& strategy);

}  // namespace crackdet

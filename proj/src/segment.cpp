#include "crackdet/segment.hpp"

#include <cmath>
#include <cstdlib>

namespace crackdet {

namespace {

// 192-bit product of a 128-bit square and a 64-bit weight, for exact
// comparison of between-class-variance rationals a^2/b.
struct Wide {
  unsigned __int128 hi;
  std::uint64_t lo;
};

Wide mul(unsigned __int128 a, std::uint64_t b) {
  const unsigned __int128 lo = static_cast<unsigned __int128>(static_cast<std::uint64_t>(a)) * b;
  const unsigned __int128 hi =
      static_cast<unsigned __int128>(static_cast<std::uint64_t>(a >> 64)) * b + (lo >> 64);
  return {hi, static_cast<std::uint64_t>(lo)};
}

bool greater(const Wide& x, const Wide& y) {
  return x.hi != y.hi ? x.hi > y.hi : x.lo > y.lo;
}

struct ClassSums {
  std::uint64_t count = 0;
  std::uint64_t weighted = 0;  // sum of intensity * count
};

}  // namespace

BinaryImage threshold_fixed(const GrayImage& image, int t) {
  if (t < 0 || t > 255) throw std::invalid_argument("threshold must be in [0, 255]");
  if (image.empty()) throw std::domain_error("threshold_fixed: empty image");
  BinaryImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out.set(x, y, image(x, y) <= t);
    }
  }
  return out;
}

ThresholdOutcome otsu_threshold(const Histogram& hist) {
  if (hist.total == 0) throw std::domain_error("otsu_threshold: empty histogram");

  const std::uint64_t n = hist.total;
  std::uint64_t weighted_total = 0;
  for (int v = 0; v < 256; ++v) weighted_total += static_cast<std::uint64_t>(v) * hist.bins[v];

  // Between-class variance at t is proportional to
  //   (s0*n - S*n0)^2 / (n0*(n - n0))
  // with n0, s0 the count and weighted sum of intensities <= t. Numerator and
  // denominator stay exact for any image below ~256 Mpx.
  int best_t = 0;
  unsigned __int128 best_num = 0;
  std::uint64_t best_den = 1;

  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  for (int t = 0; t <= 254; ++t) {
    n0 += hist.bins[t];
    s0 += static_cast<std::uint64_t>(t) * hist.bins[t];
    if (n0 == 0 || n0 == n) continue;  // a zero-mass class contributes variance 0

    const __int128 diff = static_cast<__int128>(s0) * n - static_cast<__int128>(weighted_total) * n0;
    const unsigned __int128 mag =
        diff < 0 ? static_cast<unsigned __int128>(-diff) : static_cast<unsigned __int128>(diff);
    const unsigned __int128 num = mag * mag;
    const std::uint64_t den = n0 * (n - n0);
    if (greater(mul(num, best_den), mul(best_num, den))) {
      best_t = t;
      best_num = num;
      best_den = den;
    }
  }
  return {best_t, 1, true};
}

ThresholdOutcome ittt_threshold(const GrayImage& image, int epsilon, int max_iterations,
                                std::vector<int>* trace) {
  if (epsilon < 0) throw std::invalid_argument("ittt epsilon must be >= 0");
  if (max_iterations < 1) throw std::invalid_argument("ittt max_iterations must be >= 1");
  if (image.empty()) throw std::domain_error("ittt_threshold: empty image");

  Histogram region = histogram(image);
  int threshold = otsu_threshold(region).threshold;
  if (trace) trace->assign(1, threshold);

  for (int k = 1;; ++k) {
    ClassSums dark, bright;
    for (int v = 0; v < 256; ++v) {
      ClassSums& side = v <= threshold ? dark : bright;
      side.count += region.bins[v];
      side.weighted += static_cast<std::uint64_t>(v) * region.bins[v];
    }
    if (dark.count == 0 || bright.count == 0) return {threshold, k, true};

    const double mean_dark = static_cast<double>(dark.weighted) / dark.count;
    const double mean_bright = static_cast<double>(bright.weighted) / bright.count;

    // Undecided region: intensities strictly between the class means.
    Histogram undecided{};
    int distinct = 0;
    for (int v = 0; v < 256; ++v) {
      if (v > mean_dark && v < mean_bright && region.bins[v] > 0) {
        undecided.bins[v] = region.bins[v];
        undecided.total += region.bins[v];
        ++distinct;
      }
    }
    // Fewer than two distinct intensities cannot be re-split.
    if (undecided.total == 0 || distinct < 2) return {threshold, k, true};

    const int candidate = otsu_threshold(undecided).threshold;
    if (trace) trace->push_back(candidate);
    if (std::abs(candidate - threshold) <= epsilon) return {threshold, k, true};

    threshold = candidate;
    region = undecided;
    if (k == max_iterations) return {threshold, k, false};
  }
}

std::pair<BinaryImage, ThresholdOutcome> binarize(const GrayImage& image,
                                                  const ThresholdStrategy& strategy) {
  if (image.empty()) throw std::domain_error("binarize: empty image");
  ThresholdOutcome outcome;
  switch (strategy.kind) {
    case ThresholdKind::Fixed:
      if (strategy.fixed_threshold < 0 || strategy.fixed_threshold > 255) {
        throw std::invalid_argument("fixed threshold must be in [0, 255]");
      }
      outcome = {strategy.fixed_threshold, 1, true};
      break;
    case ThresholdKind::Otsu:
      outcome = otsu_threshold(histogram(image));
      break;
    case ThresholdKind::Ittt:
      outcome = ittt_threshold(image, strategy.ittt_epsilon, strategy.ittt_max_iterations);
      break;
  }
  return {threshold_fixed(image, outcome.threshold), outcome};
}

}  // namespace crackdet

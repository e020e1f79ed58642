#include "crackdet/morphology.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace crackdet {

namespace {

void check_connectivity(int connectivity) {
  if (connectivity != 4 && connectivity != 8) {
    throw std::invalid_argument("connectivity must be 4 or 8");
  }
}

int clamp_coord(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

}  // namespace

StructuringElementPair StructuringElementPair::from_patterns(const char* hit_pattern,
                                                             const char* miss_pattern) {
  StructuringElementPair se;
  for (int i = 0; i < 9; ++i) {
    const bool h = hit_pattern[i] == '1';
    const bool m = miss_pattern[i] == '1';
    if (h && m) throw std::invalid_argument("hit and miss masks overlap");
    se.hit[i / 3][i % 3] = h;
    se.miss[i / 3][i % 3] = m;
  }
  return se;
}

StructuringElementPair StructuringElementPair::rotated90() const {
  StructuringElementPair out;
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) {
      // Clockwise: new (y, x) takes old (2 - x, y).
      out.hit[y][x] = hit[2 - x][y];
      out.miss[y][x] = miss[2 - x][y];
    }
  }
  return out;
}

const std::array<StructuringElementPair, 8>& thinning_elements() {
  static const std::array<StructuringElementPair, 8> elements = [] {
    const StructuringElementPair edge = StructuringElementPair::from_patterns(
        "000"
        "010"
        "111",
        "111"
        "000"
        "000");
    const StructuringElementPair corner = StructuringElementPair::from_patterns(
        "000"
        "110"
        "010",
        "011"
        "001"
        "000");
    std::array<StructuringElementPair, 8> all;
    StructuringElementPair e = edge;
    StructuringElementPair c = corner;
    for (int r = 0; r < 4; ++r) {
      all[2 * r] = e;
      all[2 * r + 1] = c;
      e = e.rotated90();
      c = c.rotated90();
    }
    return all;
  }();
  return elements;
}

GrayImage median_filter(const GrayImage& image, int radius) {
  if (radius < 1) throw std::invalid_argument("median radius must be >= 1");
  if (image.empty()) throw std::domain_error("median_filter: empty image");

  const int w = image.width();
  const int h = image.height();
  GrayImage out(w, h);
  const int side = 2 * radius + 1;
  std::vector<std::uint8_t> window(static_cast<std::size_t>(side) * side);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::size_t n = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const std::uint8_t* row = image.row(clamp_coord(y + dy, h - 1));
        for (int dx = -radius; dx <= radius; ++dx) {
          window[n++] = row[clamp_coord(x + dx, w - 1)];
        }
      }
      auto mid = window.begin() + n / 2;
      std::nth_element(window.begin(), mid, window.begin() + n);
      out(x, y) = *mid;
    }
  }
  return out;
}

BinaryImage majority_filter(const BinaryImage& mask, int radius) {
  if (radius < 1) throw std::invalid_argument("majority radius must be >= 1");
  if (mask.empty()) throw std::domain_error("majority_filter: empty mask");

  const int w = mask.width();
  const int h = mask.height();
  const int side = 2 * radius + 1;
  const int needed = (side * side) / 2 + 1;  // window size is odd
  BinaryImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int votes = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const std::uint8_t* row = mask.row(clamp_coord(y + dy, h - 1));
        for (int dx = -radius; dx <= radius; ++dx) {
          votes += row[clamp_coord(x + dx, w - 1)];
        }
      }
      out.set(x, y, votes >= needed);
    }
  }
  return out;
}

BinaryImage hit_or_miss(const BinaryImage& mask, const StructuringElementPair& se) {
  const int w = mask.width();
  const int h = mask.height();
  BinaryImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool match = true;
      for (int dy = -1; dy <= 1 && match; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const bool fg = mask.get_clipped(x + dx, y + dy);
          if (se.hit[dy + 1][dx + 1] && !fg) {
            match = false;
            break;
          }
          if (se.miss[dy + 1][dx + 1] && fg) {
            match = false;
            break;
          }
        }
      }
      out.set(x, y, match);
    }
  }
  return out;
}

BinaryImage thin_once(const BinaryImage& mask, const StructuringElementPair& se) {
  if (!se.hit[1][1]) {
    // General case: matches may sit on background pixels.
    const BinaryImage matches = hit_or_miss(mask, se);
    BinaryImage out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
      for (int x = 0; x < mask.width(); ++x) {
        out.set(x, y, mask.get(x, y) && !matches.get(x, y));
      }
    }
    return out;
  }

  // Center-in-hit fast path: only foreground pixels can match, so the scan
  // is proportional to mask density. Offsets are flattened row strides.
  const int w = mask.width();
  const int h = mask.height();
  BinaryImage out = mask;

  int hit_offsets[8];
  int miss_offsets[8];
  int n_hit = 0;
  int n_miss = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dy == 0 && dx == 0) continue;
      if (se.hit[dy + 1][dx + 1]) hit_offsets[n_hit++] = dy * w + dx;
      if (se.miss[dy + 1][dx + 1]) miss_offsets[n_miss++] = dy * w + dx;
    }
  }

  const std::uint8_t* src = mask.pixels().data();
  std::uint8_t* dst = out.data();
  for (int y = 1; y + 1 < h; ++y) {
    const std::size_t row_base = static_cast<std::size_t>(y) * w;
    for (int x = 1; x + 1 < w; ++x) {
      const std::size_t i = row_base + x;
      if (!src[i]) continue;
      bool match = true;
      for (int k = 0; k < n_hit && match; ++k) match = src[i + hit_offsets[k]] != 0;
      for (int k = 0; k < n_miss && match; ++k) match = src[i + miss_offsets[k]] == 0;
      if (match) dst[i] = 0;
    }
  }

  // Border ring, with out-of-range cells reading as background.
  const auto matches_at = [&](int x, int y) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const bool fg = mask.get_clipped(x + dx, y + dy);
        if (se.hit[dy + 1][dx + 1] && !fg) return false;
        if (se.miss[dy + 1][dx + 1] && fg) return false;
      }
    }
    return true;
  };
  for (int x = 0; x < w; ++x) {
    for (const int y : {0, h - 1}) {
      if (mask.get(x, y) && matches_at(x, y)) out.set(x, y, false);
    }
  }
  for (int y = 1; y + 1 < h; ++y) {
    for (const int x : {0, w - 1}) {
      if (mask.get(x, y) && matches_at(x, y)) out.set(x, y, false);
    }
  }
  return out;
}

BinaryImage thin_pass(const BinaryImage& mask) {
  BinaryImage current = mask;
  for (const StructuringElementPair& se : thinning_elements()) {
    current = thin_once(current, se);
  }
  return current;
}

ThinResult thin_to_convergence(const BinaryImage& mask, int max_passes) {
  if (max_passes < 1) throw std::invalid_argument("max_passes must be >= 1");
  BinaryImage current = mask;
  for (int pass = 1; pass <= max_passes; ++pass) {
    BinaryImage next = thin_pass(current);
    if (next == current) return {std::move(current), pass};
    current = std::move(next);
  }
  return {std::move(current), max_passes};
}

BinaryImage fill_holes(const BinaryImage& mask) {
  const int w = mask.width();
  const int h = mask.height();
  if (mask.empty()) return mask;

  // Flood the border-connected background, 4-connected.
  std::vector<std::uint8_t> outside(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::int32_t> stack;
  auto push = [&](int x, int y) {
    const std::size_t i = static_cast<std::size_t>(y) * w + x;
    if (!outside[i] && !mask.get(x, y)) {
      outside[i] = 1;
      stack.push_back(y * w + x);
    }
  };
  for (int x = 0; x < w; ++x) {
    push(x, 0);
    push(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    push(0, y);
    push(w - 1, y);
  }
  while (!stack.empty()) {
    const int idx = stack.back();
    stack.pop_back();
    const int x = idx % w;
    const int y = idx / w;
    if (x > 0) push(x - 1, y);
    if (x + 1 < w) push(x + 1, y);
    if (y > 0) push(x, y - 1);
    if (y + 1 < h) push(x, y + 1);
  }

  BinaryImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.set(x, y, mask.get(x, y) || !outside[static_cast<std::size_t>(y) * w + x]);
    }
  }
  return out;
}

LabelImage connected_components(const BinaryImage& mask, int connectivity) {
  check_connectivity(connectivity);
  const int w = mask.width();
  const int h = mask.height();
  LabelImage result{w, h, std::vector<std::int32_t>(static_cast<std::size_t>(w) * h, 0), 0};

  static constexpr int dx8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
  static constexpr int dy8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
  static constexpr int dx4[] = {0, -1, 1, 0};
  static constexpr int dy4[] = {-1, 0, 0, 1};
  const int* dx = connectivity == 8 ? dx8 : dx4;
  const int* dy = connectivity == 8 ? dy8 : dy4;
  const int n_dirs = connectivity;

  std::vector<std::int32_t> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!mask.get(x, y) || result.labels[i] != 0) continue;
      const std::int32_t label = ++result.component_count;
      result.labels[i] = label;
      stack.assign(1, static_cast<std::int32_t>(i));
      while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        const int cx = idx % w;
        const int cy = idx / w;
        for (int d = 0; d < n_dirs; ++d) {
          const int nx = cx + dx[d];
          const int ny = cy + dy[d];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
          if (mask.get(nx, ny) && result.labels[ni] == 0) {
            result.labels[ni] = label;
            stack.push_back(static_cast<std::int32_t>(ni));
          }
        }
      }
    }
  }
  return result;
}

BinaryImage remove_small_components(const BinaryImage& mask, std::int64_t min_area,
                                    int connectivity) {
  if (min_area < 0) throw std::invalid_argument("min_area must be >= 0");
  check_connectivity(connectivity);
  if (min_area == 0) return mask;

  const LabelImage labels = connected_components(mask, connectivity);
  std::vector<std::int64_t> area(static_cast<std::size_t>(labels.component_count) + 1, 0);
  for (const std::int32_t l : labels.labels) ++area[l];

  BinaryImage out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const std::int32_t l = labels.at(x, y);
      out.set(x, y, l != 0 && area[l] >= min_area);
    }
  }
  return out;
}

int euler_number(const BinaryImage& mask) {
  // Gray's bit-quad counts over every 2x2 window, one cell beyond each border
  // (outside reads as background): E = (Q1 - Q3 - 2*Qd) / 4 for 8-connected
  // foreground.
  const int w = mask.width();
  const int h = mask.height();
  std::int64_t q1 = 0, q3 = 0, qd = 0;
  for (int y = -1; y < h; ++y) {
    for (int x = -1; x < w; ++x) {
      const int a = mask.get_clipped(x, y) ? 1 : 0;
      const int b = mask.get_clipped(x + 1, y) ? 1 : 0;
      const int c = mask.get_clipped(x, y + 1) ? 1 : 0;
      const int d = mask.get_clipped(x + 1, y + 1) ? 1 : 0;
      const int count = a + b + c + d;
      if (count == 1) {
        ++q1;
      } else if (count == 3) {
        ++q3;
      } else if (count == 2 && a == d) {
        ++qd;  // diagonal pair
      }
    }
  }
  return static_cast<int>((q1 - q3 - 2 * qd) / 4);
}

BinaryImage box_dilate(const BinaryImage& mask, int radius) {
  if (radius < 0) throw std::invalid_argument("dilation radius must be >= 0");
  if (radius == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();

  // Separable: horizontal reach, then vertical.
  BinaryImage horizontal(w, h);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = mask.row(y);
    for (int x = 0; x < w; ++x) {
      bool any = false;
      const int lo = std::max(0, x - radius);
      const int hi = std::min(w - 1, x + radius);
      for (int i = lo; i <= hi && !any; ++i) any = row[i] != 0;
      horizontal.set(x, y, any);
    }
  }
  BinaryImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const int lo = std::max(0, y - radius);
    const int hi = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      bool any = false;
      for (int i = lo; i <= hi && !any; ++i) any = horizontal.get(x, i);
      out.set(x, y, any);
    }
  }
  return out;
}

}  // namespace crackdet

#pragma once

#include <initializer_list>
#include <random>
#include <string>

#include "crackdet/image.hpp"

namespace helpers {

inline crackdet::BinaryImage make_mask(int w, int h, std::initializer_list<int> cells) {
  crackdet::BinaryImage mask(w, h);
  auto it = cells.begin();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) mask.set(x, y, *it++ != 0);
  }
  return mask;
}

inline crackdet::GrayImage make_gray(int w, int h, std::initializer_list<int> values) {
  crackdet::GrayImage img(w, h);
  auto it = values.begin();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img(x, y) = static_cast<std::uint8_t>(*it++);
  }
  return img;
}

inline crackdet::GrayImage random_gray(int w, int h, std::mt19937& rng) {
  crackdet::GrayImage img(w, h);
  std::uniform_int_distribution<int> dist(0, 255);
  for (std::uint8_t& v : img.pixels()) v = static_cast<std::uint8_t>(dist(rng));
  return img;
}

inline crackdet::BinaryImage random_mask(int w, int h, double density, std::mt19937& rng) {
  crackdet::BinaryImage mask(w, h);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) mask.set(x, y, dist(rng) < density);
  }
  return mask;
}

/// Random union of filled discs: blob masks without pinch points.
inline crackdet::BinaryImage random_blobs(int w, int h, int n_blobs, std::mt19937& rng) {
  crackdet::BinaryImage mask(w, h);
  std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1);
  std::uniform_int_distribution<int> rs(2, std::max(3, std::min(w, h) / 6));
  for (int b = 0; b < n_blobs; ++b) {
    const int cx = xs(rng);
    const int cy = ys(rng);
    const int r = rs(rng);
    for (int y = std::max(0, cy - r); y <= std::min(h - 1, cy + r); ++y) {
      for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r); ++x) {
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) mask.set(x, y, true);
      }
    }
  }
  return mask;
}

inline bool subset_of(const crackdet::BinaryImage& inner, const crackdet::BinaryImage& outer) {
  for (int y = 0; y < inner.height(); ++y) {
    for (int x = 0; x < inner.width(); ++x) {
      if (inner.get(x, y) && !outer.get(x, y)) return false;
    }
  }
  return true;
}

inline std::string unique_temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  const auto dir = std::filesystem::temp_directory_path() /
                   ("crackdet_test_" + tag + "_" + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace helpers

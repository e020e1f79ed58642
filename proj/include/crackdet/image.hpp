#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace crackdet {

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File content is not a decodable image.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit-per-channel color raster, row-major.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {});
  RasterImage(int width, int height, std::vector<Rgb> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept { return data_.size(); }

  const Rgb& operator()(int x, int y) const { return data_[index(x, y)]; }
  Rgb& operator()(int x, int y) { return data_[index(x, y)]; }

  std::span<const Rgb> pixels() const noexcept { return data_; }
  std::span<Rgb> pixels() noexcept { return data_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> data_;
};

/// 8-bit single-channel raster, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept { return data_.size(); }

  std::uint8_t operator()(int x, int y) const { return data_[index(x, y)]; }
  std::uint8_t& operator()(int x, int y) { return data_[index(x, y)]; }

  const std::uint8_t* row(int y) const noexcept {
    return data_.data() + static_cast<std::size_t>(y) * width_;
  }
  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  std::span<std::uint8_t> pixels() noexcept { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Boolean raster, row-major. Convention: true = foreground = crack material.
class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept { return data_.size(); }

  bool get(int x, int y) const { return data_[index(x, y)] != 0; }
  void set(int x, int y, bool value) { data_[index(x, y)] = value ? 1 : 0; }

  /// Out-of-range coordinates read as background.
  bool get_clipped(int x, int y) const noexcept {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
    return data_[index(x, y)] != 0;
  }

  const std::uint8_t* row(int y) const noexcept {
    return data_.data() + static_cast<std::size_t>(y) * width_;
  }
  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  /// Raw 0/1 storage for kernel loops; writers must keep values 0 or 1.
  std::uint8_t* data() noexcept { return data_.data(); }

  std::size_t foreground_count() const noexcept;

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;  // 0 or 1
};

/// 256-bin intensity count vector.
struct Histogram {
  std::array<std::uint64_t, 256> bins{};
  std::uint64_t total = 0;
};

/// Decodes a PNG, PGM, or PPM file (format detected from content, not
/// extension). Grayscale sources are replicated into three equal channels.
RasterImage load_image(const std::filesystem::path& path);

/// Writes a lossless 8-bit gray image; ".png" and ".pgm" extensions supported.
void save_gray(const GrayImage& image, const std::filesystem::path& path);

/// Writes an RGB image; ".png" and ".ppm" extensions supported.
void save_raster(const RasterImage& image, const std::filesystem::path& path);

/// Writes foreground as 255 and background as 0 (display convention only).
void save_binary(const BinaryImage& image, const std::filesystem::path& path);

Histogram histogram(const GrayImage& image);

/// Smallest intensity whose cumulative count reaches fraction*total, with the
/// required mass clamped to at least one pixel (so fraction 0 yields the
/// minimum occupied intensity). Upper cuts: percentile_intensity(h, 1 - f).
int percentile_intensity(const Histogram& hist, double fraction);

}  // namespace crackdet

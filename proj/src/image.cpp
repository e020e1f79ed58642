#include "crackdet/image.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

namespace crackdet {

namespace {

void check_dimensions(int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be at least 1x1, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return bytes;
}

// --- PNM (PGM/PPM, binary and ASCII) ---------------------------------------

struct PnmParser {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw DecodeError("PNM: " + what + " at byte offset " + std::to_string(pos));
  }

  bool eof() const { return pos >= bytes.size(); }
  std::uint8_t peek() const { return bytes[pos]; }

  void skip_space_and_comments() {
    while (!eof()) {
      const std::uint8_t c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') ++pos;
      } else if (std::isspace(c)) {
        ++pos;
      } else {
        return;
      }
    }
  }

  int read_int(int max_value) {
    skip_space_and_comments();
    if (eof()) fail("unexpected end of header");
    if (!std::isdigit(peek())) fail("expected integer");
    long value = 0;
    while (!eof() && std::isdigit(peek())) {
      value = value * 10 + (peek() - '0');
      if (value > max_value) fail("value out of range");
      ++pos;
    }
    return static_cast<int>(value);
  }
};

RasterImage decode_pnm(const std::vector<std::uint8_t>& bytes) {
  PnmParser p{bytes};
  if (bytes.size() < 2 || bytes[0] != 'P') p.fail("bad magic");
  const char kind = static_cast<char>(bytes[1]);
  p.pos = 2;

  const bool color = (kind == '3' || kind == '6');
  const bool ascii = (kind == '2' || kind == '3');
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') p.fail("unsupported PNM kind");

  const int width = p.read_int(1 << 24);
  const int height = p.read_int(1 << 24);
  const int maxval = p.read_int(1 << 16);
  if (width < 1 || height < 1) p.fail("non-positive dimensions");
  if (maxval < 1 || maxval > 255) p.fail("unsupported maxval " + std::to_string(maxval));

  const std::size_t samples = static_cast<std::size_t>(width) * height * (color ? 3 : 1);
  std::vector<std::uint8_t> data(samples);

  if (ascii) {
    for (std::size_t i = 0; i < samples; ++i) {
      data[i] = static_cast<std::uint8_t>(p.read_int(maxval));
    }
  } else {
    // Single whitespace byte separates the header from raw samples.
    if (p.eof() || !std::isspace(p.peek())) p.fail("missing header terminator");
    ++p.pos;
    if (bytes.size() - p.pos < samples) {
      p.pos = bytes.size();
      p.fail("truncated pixel data");
    }
    std::memcpy(data.data(), bytes.data() + p.pos, samples);
  }

  std::vector<Rgb> pixels(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (color) {
      pixels[i] = {data[3 * i], data[3 * i + 1], data[3 * i + 2]};
    } else {
      pixels[i] = {data[i], data[i], data[i]};
    }
  }
  return RasterImage(width, height, std::move(pixels));
}

void write_pnm(const std::filesystem::path& path, int width, int height,
               const std::uint8_t* samples, int channels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << (channels == 3 ? "P6" : "P5") << "\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(samples),
            static_cast<std::streamsize>(width) * height * channels);
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

// --- PNG (via libpng's simplified API) --------------------------------------

RasterImage decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DecodeError(std::string("PNG: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw DecodeError("PNG: " + message);
  }
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  std::vector<Rgb> pixels(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = {buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
  }
  return RasterImage(width, height, std::move(pixels));
}

void write_png(const std::filesystem::path& path, int width, int height,
               const std::uint8_t* samples, int channels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, samples, 0, nullptr)) {
    throw IoError("PNG write to " + path.string() + " failed: " + image.message);
  }
}

void save_samples(const std::filesystem::path& path, int width, int height,
                  const std::uint8_t* samples, int channels) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  const char* pnm_ext = channels == 3 ? ".ppm" : ".pgm";
  if (ext == ".png") {
    write_png(path, width, height, samples, channels);
  } else if (ext == pnm_ext) {
    write_pnm(path, width, height, samples, channels);
  } else {
    throw std::invalid_argument("unsupported image extension '" + ext + "' (use .png or " +
                                pnm_ext + "): " + path.string());
  }
}

}  // namespace

RasterImage::RasterImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  check_dimensions(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

RasterImage::RasterImage(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), data_(std::move(pixels)) {
  check_dimensions(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("pixel count does not match dimensions");
  }
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  check_dimensions(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), data_(std::move(pixels)) {
  check_dimensions(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("pixel count does not match dimensions");
  }
}

BinaryImage::BinaryImage(int width, int height, bool fill)
    : width_(width), height_(height) {
  check_dimensions(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryImage::foreground_count() const noexcept {
  std::size_t n = 0;
  for (const std::uint8_t v : data_) n += v;
  return n;
}

RasterImage load_image(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') {
    return decode_pnm(bytes);
  }
  throw DecodeError("unrecognized image format at byte offset 0: " + path.string());
}

void save_gray(const GrayImage& image, const std::filesystem::path& path) {
  if (image.empty()) throw std::domain_error("save_gray: empty image");
  save_samples(path, image.width(), image.height(), image.pixels().data(), 1);
}

void save_raster(const RasterImage& image, const std::filesystem::path& path) {
  if (image.empty()) throw std::domain_error("save_raster: empty image");
  std::vector<std::uint8_t> interleaved;
  interleaved.reserve(image.pixel_count() * 3);
  for (const Rgb& px : image.pixels()) {
    interleaved.push_back(px.r);
    interleaved.push_back(px.g);
    interleaved.push_back(px.b);
  }
  save_samples(path, image.width(), image.height(), interleaved.data(), 3);
}

void save_binary(const BinaryImage& image, const std::filesystem::path& path) {
  if (image.empty()) throw std::domain_error("save_binary: empty image");
  GrayImage gray(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      gray(x, y) = image.get(x, y) ? 255 : 0;
    }
  }
  save_samples(path, gray.width(), gray.height(), gray.pixels().data(), 1);
}

Histogram histogram(const GrayImage& image) {
  Histogram h;
  for (const std::uint8_t v : image.pixels()) ++h.bins[v];
  h.total = image.pixel_count();
  return h;
}

int percentile_intensity(const Histogram& hist, double fraction) {
  if (hist.total == 0) throw std::domain_error("percentile_intensity: empty histogram");
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("percentile fraction must be in [0,1]");
  }
  const double target = std::max(fraction * static_cast<double>(hist.total), 1.0);
  std::uint64_t cumulative = 0;
  for (int v = 0; v < 256; ++v) {
    cumulative += hist.bins[v];
    if (static_cast<double>(cumulative) >= target) return v;
  }
  return 255;
}

}  // namespace crackdet

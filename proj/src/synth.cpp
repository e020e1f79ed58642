#include "crackdet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace crackdet {

namespace {

constexpr int kSpeckleCell = 16;
constexpr int kSpeckleAmplitude = 12;
constexpr int kBrickWidth = 32;
constexpr int kBrickHeight = 16;
constexpr int kMortarThickness = 2;
constexpr int kMortarDrop = 60;   // mortar sits this far below the face mean
constexpr int kFaceJitter = 10;   // per-brick face offset bound

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic substreams: the standard-pinned mt19937_64 engine seeded per
// phase, with hand-rolled samplers so output never depends on the C++
// library's distribution implementations.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform_in(double lo, double hi) { return lo + uniform() * (hi - lo); }

  bool coin() { return (engine_() & 1) != 0; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

int clamp_intensity(double v) {
  return std::clamp(static_cast<int>(std::llround(v)), 0, 255);
}

std::vector<int> render_background(const SynthParams& p) {
  const std::size_t n = static_cast<std::size_t>(p.width) * p.height;
  std::vector<int> values(n, p.background_mean);
  switch (p.background) {
    case BackgroundKind::Plain:
      break;
    case BackgroundKind::Speckle: {
      Sampler rng(splitmix64(p.seed ^ 0x5bec1e5bec1e5becULL));
      // Value noise: a coarse grid of offsets, bilinearly interpolated.
      const int gw = p.width / kSpeckleCell + 2;
      const int gh = p.height / kSpeckleCell + 2;
      std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
      for (double& g : grid) {
        g = rng.uniform_in(-kSpeckleAmplitude, kSpeckleAmplitude);
      }
      for (int y = 0; y < p.height; ++y) {
        const int gy = y / kSpeckleCell;
        const double fy = static_cast<double>(y % kSpeckleCell) / kSpeckleCell;
        for (int x = 0; x < p.width; ++x) {
          const int gx = x / kSpeckleCell;
          const double fx = static_cast<double>(x % kSpeckleCell) / kSpeckleCell;
          const double top = grid[gy * gw + gx] * (1 - fx) + grid[gy * gw + gx + 1] * fx;
          const double bottom =
              grid[(gy + 1) * gw + gx] * (1 - fx) + grid[(gy + 1) * gw + gx + 1] * fx;
          const double offset = top * (1 - fy) + bottom * fy;
          values[static_cast<std::size_t>(y) * p.width + x] =
              clamp_intensity(p.background_mean + offset);
        }
      }
      break;
    }
    case BackgroundKind::Brick: {
      const int mortar = std::max(0, p.background_mean - kMortarDrop);
      for (int y = 0; y < p.height; ++y) {
        const int course = y / kBrickHeight;
        const int row_shift = (course % 2) * (kBrickWidth / 2);
        for (int x = 0; x < p.width; ++x) {
          const int xs = x + row_shift;
          int v;
          if (y % kBrickHeight < kMortarThickness || xs % kBrickWidth < kMortarThickness) {
            v = mortar;
          } else {
            // Stable per-brick face tone, independent of draw order.
            const std::uint64_t cell =
                splitmix64(p.seed ^ splitmix64((static_cast<std::uint64_t>(course) << 32) ^
                                               static_cast<std::uint64_t>(xs / kBrickWidth)));
            const double u = static_cast<double>(cell >> 11) * 0x1.0p-53;
            v = clamp_intensity(p.background_mean + (2.0 * u - 1.0) * kFaceJitter);
          }
          values[static_cast<std::size_t>(y) * p.width + x] = v;
        }
      }
      break;
    }
  }
  return values;
}

}  // namespace

BackgroundKind background_from_string(std::string_view name) {
  if (name == "plain") return BackgroundKind::Plain;
  if (name == "speckle") return BackgroundKind::Speckle;
  if (name == "brick") return BackgroundKind::Brick;
  throw std::invalid_argument("unknown background '" + std::string(name) +
                              "' (expected plain, speckle, or brick)");
}

std::string_view background_name(BackgroundKind kind) {
  switch (kind) {
    case BackgroundKind::Plain:
      return "plain";
    case BackgroundKind::Speckle:
      return "speckle";
    case BackgroundKind::Brick:
      return "brick";
  }
  return "plain";
}

void validate(const SynthParams& p) {
  if (p.width < 1 || p.height < 1) {
    throw std::domain_error("synth: zero-area image");
  }
  if (p.crack_width < 1 || p.crack_width > 7) {
    throw std::invalid_argument("crack_width must be in [1, 7]");
  }
  if (p.crack_intensity < 0 || p.crack_intensity > 100) {
    throw std::invalid_argument("crack_intensity must be in [0, 100]");
  }
  if (p.crack_intensity >= p.background_mean) {
    throw std::invalid_argument("crack_intensity must be below background_mean");
  }
  if (p.background_mean < 0 || p.background_mean > 255) {
    throw std::invalid_argument("background_mean must be in [0, 255]");
  }
  if (p.noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
  if (p.impulse_rate < 0.0 || p.impulse_rate > 1.0) {
    throw std::invalid_argument("impulse_rate must be in [0, 1]");
  }
  if (p.n_cracks < 0) throw std::invalid_argument("n_cracks must be >= 0");
  if (p.wander_degrees < 0.0) throw std::invalid_argument("wander_degrees must be >= 0");
  if (p.crack_length < 0) throw std::invalid_argument("crack_length must be >= 0");
}

int background_floor(const SynthParams& p) {
  switch (p.background) {
    case BackgroundKind::Plain:
      return p.background_mean;
    case BackgroundKind::Speckle:
      return std::max(0, p.background_mean - kSpeckleAmplitude);
    case BackgroundKind::Brick:
      return std::max(0, p.background_mean - kMortarDrop);
  }
  return 0;
}

SynthImage generate(const SynthParams& params) {
  validate(params);
  const int w = params.width;
  const int h = params.height;

  std::vector<int> canvas = render_background(params);
  BinaryImage truth(w, h);
  double total_length = 0.0;

  // Crack walks: unit steps with bounded heading perturbation, stopping at a
  // border margin (reflections would fold the band onto itself and corrupt
  // the ground-truth length). Walks that stop at less than half the target
  // length are redrawn a few times; the longest attempt is kept.
  Sampler walk_rng(splitmix64(params.seed ^ 0xc4ac4ac4ac4ac4aULL));
  const int steps =
      params.crack_length > 0 ? params.crack_length : (std::min(w, h) * 6) / 10;
  const double margin = params.crack_width / 2 + 1.0;
  const double wander = params.wander_degrees * std::numbers::pi / 180.0;
  const int lo_dx = -((params.crack_width - 1) / 2);
  const int hi_dx = params.crack_width / 2;

  const auto stamp = [&](int px, int py) {
    for (int dy = lo_dx; dy <= hi_dx; ++dy) {
      for (int dx = lo_dx; dx <= hi_dx; ++dx) {
        const int x = px + dx;
        const int y = py + dy;
        if (x < 0 || y < 0 || x >= w || y >= h) continue;
        canvas[static_cast<std::size_t>(y) * w + x] = params.crack_intensity;
        truth.set(x, y, true);
      }
    }
  };

  const auto simulate = [&](std::vector<std::pair<int, int>>& centers) {
    centers.clear();
    double x = walk_rng.uniform_in(w * 0.15, w * 0.85);
    double y = walk_rng.uniform_in(h * 0.15, h * 0.85);
    double heading = params.initial_heading_degrees < 0.0
                         ? walk_rng.uniform_in(0.0, 2.0 * std::numbers::pi)
                         : params.initial_heading_degrees * std::numbers::pi / 180.0;
    centers.emplace_back(static_cast<int>(std::llround(x)),
                         static_cast<int>(std::llround(y)));
    for (int step = 0; step < steps; ++step) {
      heading += walk_rng.uniform_in(-wander, wander);
      const double nx = x + std::cos(heading);
      const double ny = y + std::sin(heading);
      if (nx < margin || nx > w - 1 - margin || ny < margin || ny > h - 1 - margin) {
        break;
      }
      x = nx;
      y = ny;
      centers.emplace_back(static_cast<int>(std::llround(x)),
                           static_cast<int>(std::llround(y)));
    }
  };

  static const double kDiagonal = std::sqrt(2.0);
  std::vector<std::pair<int, int>> centers, attempt;
  for (int crack = 0; crack < params.n_cracks; ++crack) {
    simulate(centers);
    for (int retry = 0; retry < 7 && centers.size() <= static_cast<std::size_t>(steps) / 2;
         ++retry) {
      simulate(attempt);
      if (attempt.size() > centers.size()) centers.swap(attempt);
    }

    stamp(centers[0].first, centers[0].second);
    for (std::size_t i = 1; i < centers.size(); ++i) {
      stamp(centers[i].first, centers[i].second);
      // Ground-truth length in weighted pixels along the digital centerline.
      const int dx = std::abs(centers[i].first - centers[i - 1].first);
      const int dy = std::abs(centers[i].second - centers[i - 1].second);
      if (dx != 0 && dy != 0) {
        total_length += kDiagonal;
      } else if (dx != 0 || dy != 0) {
        total_length += 1.0;
      }
    }
  }

  Sampler noise_rng(splitmix64(params.seed ^ 0x015e015e015e015eULL));
  if (params.noise_sigma > 0.0) {
    for (int& v : canvas) {
      v = clamp_intensity(v + noise_rng.gaussian() * params.noise_sigma);
    }
  }
  if (params.impulse_rate > 0.0) {
    for (int& v : canvas) {
      if (noise_rng.uniform() < params.impulse_rate) v = noise_rng.coin() ? 255 : 0;
    }
  }

  RasterImage image(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t v =
          static_cast<std::uint8_t>(canvas[static_cast<std::size_t>(y) * w + x]);
      image(x, y) = {v, v, v};
    }
  }
  return {std::move(image), std::move(truth), total_length};
}

std::filesystem::path generate_corpus(const SynthParams& base, int count,
                                      const std::filesystem::path& out_dir) {
  if (count < 0) throw std::invalid_argument("corpus count must be >= 0");
  validate(base);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  const std::filesystem::path manifest_path = out_dir / "manifest.csv";
  std::ofstream manifest(manifest_path, std::ios::trunc);
  if (!manifest) throw IoError("cannot write manifest " + manifest_path.string());
  manifest << "path,mask_path,seed,truth_length\n";

  for (int i = 0; i < count; ++i) {
    SynthParams params = base;
    params.seed = base.seed + static_cast<std::uint64_t>(i);
    const SynthImage sample = generate(params);

    char image_name[32];
    char mask_name[32];
    std::snprintf(image_name, sizeof image_name, "img_%04d.png", i);
    std::snprintf(mask_name, sizeof mask_name, "mask_%04d.png", i);
    save_raster(sample.image, out_dir / image_name);
    save_binary(sample.truth, out_dir / mask_name);

    char length_text[32];
    std::snprintf(length_text, sizeof length_text, "%.3f", sample.truth_length);
    manifest << image_name << ',' << mask_name << ',' << params.seed << ','
             << length_text << '\n';
  }
  manifest.flush();
  if (!manifest) throw IoError("write failure on " + manifest_path.string());
  return manifest_path;
}

}  // namespace crackdet

#pragma once

#include <cstdint>
#include <filesystem>

#include "crackdet/image.hpp"

namespace crackdet {

enum class BackgroundKind { Plain, Speckle, Brick };

BackgroundKind background_from_string(std::string_view name);
std::string_view background_name(BackgroundKind kind);

struct SynthParams {
  int width = 256;
  int height = 256;
  std::uint64_t seed = 0;
  int crack_width = 3;       // [1, 7]
  int crack_intensity = 30;  // [0, 100], must stay below background_mean
  BackgroundKind background = BackgroundKind::Speckle;
  int background_mean = 150;
  double noise_sigma = 8.0;
  double impulse_rate = 0.002;  // salt-and-pepper fraction
  int n_cracks = 1;
  double wander_degrees = 30.0;  // per-step heading perturbation bound
  int crack_length = 0;          // steps per crack; 0 picks 0.6*min(w,h)
  double initial_heading_degrees = -1.0;  // < 0 draws a random heading per crack
};

void validate(const SynthParams& params);

struct SynthImage {
  RasterImage image;
  BinaryImage truth;          // exactly the rendered crack pixels
  double truth_length = 0.0;  // total centerline length in unit steps
};

/// Renders seeded random-walk cracks over a textured background with additive
/// clamped Gaussian noise and salt-and-pepper impulses. Output is a pure
/// function of the parameters (fixed engine, fixed draw order).
SynthImage generate(const SynthParams& params);

/// Writes `count` image/truth pairs with seeds base.seed + i plus a manifest
/// CSV (`path,mask_path,seed,truth_length`, paths relative to the manifest).
/// Returns the manifest path.
std::filesystem::path generate_corpus(const SynthParams& base, int count,
                                      const std::filesystem::path& out_dir);

/// Lower bound of pre-noise non-crack intensities for the chosen texture.
int background_floor(const SynthParams& params);

}  // namespace crackdet

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "crackdet/synth.hpp"
#include "helpers.hpp"

using namespace crackdet;
namespace fs = std::filesystem;

namespace {

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("generate with no cracks and no noise is a constant plain image") {
  SynthParams params;
  params.width = 32;
  params.height = 24;
  params.n_cracks = 0;
  params.noise_sigma = 0.0;
  params.impulse_rate = 0.0;
  params.background = BackgroundKind::Plain;
  const SynthImage sample = generate(params);
  CHECK(sample.truth.foreground_count() == 0);
  CHECK(sample.truth_length == 0.0);
  for (const Rgb& px : sample.image.pixels()) {
    CHECK(px == Rgb{150, 150, 150});
  }
}

TEST_CASE("generate is a pure function of its parameters") {
  SynthParams params;
  params.seed = 777;
  params.width = 64;
  params.height = 64;
  params.background = BackgroundKind::Speckle;
  const SynthImage a = generate(params);
  const SynthImage b = generate(params);
  CHECK(a.image == b.image);
  CHECK(a.truth == b.truth);
  CHECK(a.truth_length == b.truth_length);

  params.seed = 778;
  const SynthImage c = generate(params);
  CHECK_FALSE(a.image == c.image);
}

TEST_CASE("a straight width-3 crack of 100 steps covers about 300 pixels") {
  SynthParams params;
  // Wide enough that a 100-step eastward walk never reflects off the border
  // regardless of where in the central band it starts.
  params.width = 704;
  params.height = 64;
  params.seed = 5;
  params.crack_width = 3;
  params.crack_length = 100;
  params.wander_degrees = 0.0;        // straight
  params.initial_heading_degrees = 0.0;  // axis-aligned, so area ~ width x length
  params.noise_sigma = 0.0;
  params.impulse_rate = 0.0;
  const SynthImage sample = generate(params);
  CHECK(sample.truth_length == doctest::Approx(100.0));
  const std::size_t area = sample.truth.foreground_count();
  CHECK(area >= 280);
  CHECK(area <= 320);
}

TEST_CASE("pre-noise intensities honor the truth-darkness invariant") {
  for (const BackgroundKind bg :
       {BackgroundKind::Plain, BackgroundKind::Speckle, BackgroundKind::Brick}) {
    SynthParams params;
    params.width = 96;
    params.height = 96;
    params.seed = 21;
    params.background = bg;
    params.noise_sigma = 0.0;
    params.impulse_rate = 0.0;
    params.n_cracks = 2;
    const SynthImage sample = generate(params);
    const int floor = background_floor(params);
    for (int y = 0; y < 96; ++y) {
      for (int x = 0; x < 96; ++x) {
        const int v = sample.image(x, y).r;
        if (sample.truth.get(x, y)) {
          REQUIRE(v == params.crack_intensity);
        } else {
          REQUIRE(v >= floor);
        }
      }
    }
  }
}

TEST_CASE("brick backgrounds carry dark mortar outside the truth mask") {
  SynthParams params;
  params.width = 96;
  params.height = 96;
  params.seed = 33;
  params.background = BackgroundKind::Brick;
  params.noise_sigma = 0.0;
  params.impulse_rate = 0.0;
  params.n_cracks = 1;
  const SynthImage sample = generate(params);
  const int mortar = background_floor(params);
  REQUIRE(mortar < params.background_mean);
  std::size_t dark_non_truth = 0;
  for (int y = 0; y < 96; ++y) {
    for (int x = 0; x < 96; ++x) {
      if (!sample.truth.get(x, y) && sample.image(x, y).r == mortar) ++dark_non_truth;
    }
  }
  CHECK(dark_non_truth > 500);  // the mortar grid is a large dark structure
}

TEST_CASE("generate rejects invalid parameters") {
  SynthParams params;
  params.width = 0;
  CHECK_THROWS_AS(generate(params), std::domain_error);
  params.width = 32;
  params.crack_intensity = 100;
  params.background_mean = 90;
  CHECK_THROWS_AS(generate(params), std::invalid_argument);
  params.background_mean = 150;
  params.crack_width = 9;
  CHECK_THROWS_AS(generate(params), std::invalid_argument);
}

TEST_CASE("generate_corpus writes pairs, manifest, and reproduces byte-identically") {
  const fs::path dir = helpers::unique_temp_dir("corpus");
  SynthParams base;
  base.width = 48;
  base.height = 48;
  base.seed = 90;

  SUBCASE("count 0 gives an empty manifest") {
    const fs::path manifest = generate_corpus(base, 0, dir / "empty");
    std::ifstream in(manifest);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "path,mask_path,seed,truth_length");
    CHECK_FALSE(std::getline(in, line));
  }

  SUBCASE("count 3 gives three pairs and three manifest rows") {
    const fs::path manifest = generate_corpus(base, 3, dir / "three");
    int rows = 0;
    std::ifstream in(manifest);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (!line.empty()) ++rows;
    }
    CHECK(rows == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(fs::exists(dir / "three" / ("img_000" + std::to_string(i) + ".png")));
      CHECK(fs::exists(dir / "three" / ("mask_000" + std::to_string(i) + ".png")));
    }
  }

  SUBCASE("regeneration is byte-identical") {
    generate_corpus(base, 2, dir / "a");
    generate_corpus(base, 2, dir / "b");
    for (const char* name : {"manifest.csv", "img_0000.png", "mask_0001.png"}) {
      CHECK(file_bytes(dir / "a" / name) == file_bytes(dir / "b" / name));
    }
  }

  fs::remove_all(dir);
}

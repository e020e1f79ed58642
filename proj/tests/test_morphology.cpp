#include <doctest.h>

#include <random>

#include "crackdet/morphology.hpp"
#include "helpers.hpp"
#include "reference.hpp"

using namespace crackdet;
using helpers::make_mask;

TEST_CASE("median_filter leaves constant images unchanged") {
  const GrayImage img(7, 5, 42);
  CHECK(median_filter(img, 1) == img);
  CHECK(median_filter(img, 2) == img);
}

TEST_CASE("median_filter removes an isolated impulse") {
  GrayImage img(5, 5, 0);
  img(2, 2) = 255;
  const GrayImage out = median_filter(img, 1);
  for (const std::uint8_t v : out.pixels()) CHECK(v == 0);
}

TEST_CASE("median_filter matches the window-sort oracle on random images") {
  std::mt19937 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const GrayImage img = helpers::random_gray(5, 5, rng);
    const GrayImage out = median_filter(img, 1);
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 5; ++x) {
        REQUIRE(out(x, y) == ref::median_window(img, x, y, 1));
      }
    }
  }
  // A larger radius as well.
  const GrayImage img = helpers::random_gray(9, 7, rng);
  const GrayImage out = median_filter(img, 2);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) {
      REQUIRE(out(x, y) == ref::median_window(img, x, y, 2));
    }
  }
}

TEST_CASE("median_filter output values come from the local window") {
  std::mt19937 rng(67);
  const GrayImage img = helpers::random_gray(11, 11, rng);
  const GrayImage out = median_filter(img, 1);
  for (int y = 0; y < 11; ++y) {
    for (int x = 0; x < 11; ++x) {
      bool present = false;
      for (int dy = -1; dy <= 1 && !present; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int cx = std::clamp(x + dx, 0, 10);
          const int cy = std::clamp(y + dy, 0, 10);
          if (img(cx, cy) == out(x, y)) {
            present = true;
            break;
          }
        }
      }
      REQUIRE(present);
    }
  }
}

TEST_CASE("majority_filter removes isolated pixels and keeps solid interiors") {
  BinaryImage lone(5, 5);
  lone.set(2, 2, true);
  CHECK(majority_filter(lone, 1).foreground_count() == 0);

  const BinaryImage block(10, 10, true);
  CHECK(majority_filter(block, 1) == block);
}

TEST_CASE("majority_filter equals the brute-force vote on a checkerboard") {
  BinaryImage board(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) board.set(x, y, (x + y) % 2 == 0);
  }
  const BinaryImage out = majority_filter(board, 1);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      REQUIRE(out.get(x, y) == ref::majority_window(board, x, y, 1));
    }
  }
}

TEST_CASE("hit_or_miss basic laws") {
  const StructuringElementPair& corner = thinning_elements()[1];
  CHECK(hit_or_miss(BinaryImage(6, 6), corner).foreground_count() == 0);

  // Center-only hit, no miss: identity.
  const auto center_only = StructuringElementPair::from_patterns(
      "000"
      "010"
      "000",
      "000"
      "000"
      "000");
  std::mt19937 rng(71);
  const BinaryImage mask = helpers::random_mask(9, 9, 0.4, rng);
  CHECK(hit_or_miss(mask, center_only) == mask);
}

TEST_CASE("hit_or_miss matches a hand enumeration on a 4x4 mask") {
  // Corner element: hit {center, W, S}, miss {N, NE, E}; border reads as
  // background. Only (2,0) satisfies all six cells.
  const BinaryImage mask = make_mask(4, 4,
                                     {0, 1, 1, 0,
                                      1, 1, 1, 0,
                                      0, 1, 0, 0,
                                      0, 0, 0, 0});
  const BinaryImage out = hit_or_miss(mask, thinning_elements()[1]);
  const BinaryImage expected = make_mask(4, 4,
                                         {0, 0, 1, 0,
                                          0, 0, 0, 0,
                                          0, 0, 0, 0,
                                          0, 0, 0, 0});
  CHECK(out == expected);
}

TEST_CASE("thin_once removes matches and never adds pixels") {
  const StructuringElementPair& edge = thinning_elements()[0];
  CHECK(thin_once(BinaryImage(5, 5), edge).foreground_count() == 0);

  // A mask with no matches is unchanged: a single pixel matches no element.
  BinaryImage dot(5, 5);
  dot.set(2, 2, true);
  for (const StructuringElementPair& se : thinning_elements()) {
    CHECK(thin_once(dot, se) == dot);
  }

  std::mt19937 rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryImage mask = helpers::random_mask(12, 12, 0.5, rng);
    for (const StructuringElementPair& se : thinning_elements()) {
      CHECK(helpers::subset_of(thin_once(mask, se), mask));
    }
  }
}

TEST_CASE("thin_pass leaves one-pixel-wide lines alone") {
  // 10-pixel diagonal.
  BinaryImage diagonal(12, 12);
  for (int i = 0; i < 10; ++i) diagonal.set(i + 1, i + 1, true);
  CHECK(thin_pass(diagonal) == diagonal);
  CHECK(ref::thin_pass(diagonal) == diagonal);

  // 10-pixel horizontal line.
  BinaryImage line(12, 3);
  for (int i = 0; i < 10; ++i) line.set(i + 1, 1, true);
  CHECK(thin_pass(line) == line);
  CHECK(ref::thin_pass(line) == line);
}

TEST_CASE("thin_pass shrinks a 3x3 square per the element hand trace") {
  BinaryImage square(5, 5);
  for (int y = 1; y <= 3; ++y) {
    for (int x = 1; x <= 3; ++x) square.set(x, y, true);
  }

  // Hand trace: the first pass strips the edge midpoints that have full
  // foreground support, the second removes one more corner support pixel,
  // and the result is a 5-pixel fixpoint.
  const BinaryImage pass1 = thin_pass(square);
  CHECK(pass1 == make_mask(5, 5,
                           {0, 0, 0, 0, 0,
                            0, 1, 0, 1, 0,
                            0, 1, 1, 1, 0,
                            0, 1, 0, 0, 0,
                            0, 0, 0, 0, 0}));
  const BinaryImage pass2 = thin_pass(pass1);
  CHECK(pass2 == make_mask(5, 5,
                           {0, 0, 0, 0, 0,
                            0, 1, 0, 1, 0,
                            0, 1, 1, 0, 0,
                            0, 1, 0, 0, 0,
                            0, 0, 0, 0, 0}));
  CHECK(thin_pass(pass2) == pass2);
  CHECK(ref::thin_pass(square) == pass1);
}

TEST_CASE("thin_to_convergence confirms an already-thin line in one pass") {
  BinaryImage diagonal(12, 12);
  for (int i = 0; i < 10; ++i) diagonal.set(i + 1, i + 1, true);
  const ThinResult result = thin_to_convergence(diagonal);
  CHECK(result.skeleton == diagonal);
  CHECK(result.passes == 1);
  CHECK(ref::thin_to_convergence(diagonal) == diagonal);
}

TEST_CASE("thin_to_convergence reduces a solid bar to a line") {
  BinaryImage bar(24, 7);
  for (int y = 2; y <= 4; ++y) {
    for (int x = 2; x <= 21; ++x) bar.set(x, y, true);
  }
  const ThinResult result = thin_to_convergence(bar);
  CHECK(result.skeleton == ref::thin_to_convergence(bar));
  CHECK(thin_pass(result.skeleton) == result.skeleton);

  // Away from the bar ends the skeleton is exactly the 1-pixel middle row.
  for (int x = 4; x <= 19; ++x) {
    int column_count = 0;
    for (int y = 0; y < 7; ++y) column_count += result.skeleton.get(x, y) ? 1 : 0;
    CHECK(column_count == 1);
    CHECK(result.skeleton.get(x, 3));
  }
}

TEST_CASE("thin_to_convergence of an empty mask takes one pass") {
  const ThinResult result = thin_to_convergence(BinaryImage(6, 6));
  CHECK(result.skeleton.foreground_count() == 0);
  CHECK(result.passes == 1);
}

TEST_CASE("thinning is anti-extensive and reaches a fixpoint") {
  std::mt19937 rng(79);
  for (int trial = 0; trial < 15; ++trial) {
    const BinaryImage mask = helpers::random_blobs(32, 32, 3, rng);
    const BinaryImage once = thin_pass(mask);
    CHECK(helpers::subset_of(once, mask));
    const ThinResult result = thin_to_convergence(mask);
    CHECK(helpers::subset_of(result.skeleton, mask));
    CHECK(thin_pass(result.skeleton) == result.skeleton);
  }
}

TEST_CASE("fill_holes fills an enclosed hole") {
  const BinaryImage ring = make_mask(5, 5,
                                     {0, 0, 0, 0, 0,
                                      0, 1, 1, 1, 0,
                                      0, 1, 0, 1, 0,
                                      0, 1, 1, 1, 0,
                                      0, 0, 0, 0, 0});
  const BinaryImage filled = fill_holes(ring);
  CHECK(filled == make_mask(5, 5,
                            {0, 0, 0, 0, 0,
                             0, 1, 1, 1, 0,
                             0, 1, 1, 1, 0,
                             0, 1, 1, 1, 0,
                             0, 0, 0, 0, 0}));
}

TEST_CASE("fill_holes leaves masks without enclosed background unchanged") {
  std::mt19937 rng(83);
  // Sparse masks rarely enclose anything; verify against the oracle instead
  // of assuming, and include a known open shape.
  const BinaryImage u_shape = make_mask(4, 3,
                                        {1, 0, 0, 1,
                                         1, 0, 0, 1,
                                         1, 1, 1, 1});
  CHECK(fill_holes(u_shape) == u_shape);
  for (int trial = 0; trial < 25; ++trial) {
    const BinaryImage mask = helpers::random_mask(14, 14, 0.35, rng);
    CHECK(fill_holes(mask) == ref::fill_holes(mask));
  }
}

TEST_CASE("fill_holes fills both gaps of nested rings") {
  // 9x9: outer ring, gap, inner ring, gap, center pixel.
  BinaryImage rings(9, 9);
  for (int i = 0; i < 9; ++i) {
    rings.set(i, 0, true);
    rings.set(i, 8, true);
    rings.set(0, i, true);
    rings.set(8, i, true);
  }
  for (int i = 2; i < 7; ++i) {
    rings.set(i, 2, true);
    rings.set(i, 6, true);
    rings.set(2, i, true);
    rings.set(6, i, true);
  }
  const BinaryImage filled = fill_holes(rings);
  CHECK(filled == ref::fill_holes(rings));
  CHECK(filled.foreground_count() == 81);  // everything inside the outer ring
}

TEST_CASE("fill_holes is idempotent and extensive") {
  std::mt19937 rng(89);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryImage mask = helpers::random_mask(16, 16, 0.45, rng);
    const BinaryImage filled = fill_holes(mask);
    CHECK(helpers::subset_of(mask, filled));
    CHECK(fill_holes(filled) == filled);
  }
}

TEST_CASE("connected_components honors the connectivity choice") {
  BinaryImage diag(3, 3);
  diag.set(0, 0, true);
  diag.set(1, 1, true);
  CHECK(connected_components(diag, 8).component_count == 1);
  CHECK(connected_components(diag, 4).component_count == 2);
  CHECK_THROWS_AS(connected_components(diag, 6), std::invalid_argument);
}

TEST_CASE("connected_components labels in raster-scan first-encounter order") {
  const BinaryImage mask = make_mask(7, 3,
                                     {0, 1, 0, 0, 0, 1, 0,
                                      0, 1, 0, 0, 0, 1, 0,
                                      1, 0, 0, 1, 0, 0, 0});
  const LabelImage labels = connected_components(mask, 4);
  CHECK(labels.component_count == 4);
  CHECK(labels.at(1, 0) == 1);
  CHECK(labels.at(5, 0) == 2);
  CHECK(labels.at(0, 2) == 3);
  CHECK(labels.at(3, 2) == 4);
  CHECK(labels.at(0, 0) == 0);
}

TEST_CASE("connected_components count matches union-find on random masks") {
  std::mt19937 rng(97);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryImage mask = helpers::random_mask(20, 15, 0.4, rng);
    for (const int connectivity : {4, 8}) {
      REQUIRE(connected_components(mask, connectivity).component_count ==
              ref::count_components(mask, connectivity));
    }
  }
}

TEST_CASE("connected_components count is invariant under transposition") {
  std::mt19937 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryImage mask = helpers::random_mask(18, 11, 0.45, rng);
    BinaryImage transposed(11, 18);
    for (int y = 0; y < 11; ++y) {
      for (int x = 0; x < 18; ++x) transposed.set(y, x, mask.get(x, y));
    }
    for (const int connectivity : {4, 8}) {
      CHECK(connected_components(mask, connectivity).component_count ==
            connected_components(transposed, connectivity).component_count);
    }
  }
}

TEST_CASE("remove_small_components prunes by area") {
  std::mt19937 rng(103);
  const BinaryImage mask = helpers::random_mask(16, 16, 0.3, rng);
  CHECK(remove_small_components(mask, 0, 8) == mask);

  BinaryImage blob(6, 6);
  blob.set(1, 1, true);
  blob.set(2, 1, true);
  blob.set(1, 2, true);
  CHECK(remove_small_components(blob, 4, 8).foreground_count() == 0);
  CHECK(remove_small_components(blob, 3, 8) == blob);
}

TEST_CASE("remove_small_components keeps exactly the big-enough components") {
  std::mt19937 rng(107);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryImage mask = helpers::random_mask(20, 20, 0.35, rng);
    const std::int64_t min_area = 1 + static_cast<int>(rng() % 8);
    const BinaryImage pruned = remove_small_components(mask, min_area, 8);
    CHECK(helpers::subset_of(pruned, mask));

    // Oracle: recompute every component's area and check the survivors.
    const LabelImage labels = connected_components(mask, 8);
    std::vector<std::int64_t> area(labels.component_count + 1, 0);
    for (const std::int32_t l : labels.labels) ++area[l];
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 20; ++x) {
        const bool expect = mask.get(x, y) && area[labels.at(x, y)] >= min_area;
        REQUIRE(pruned.get(x, y) == expect);
      }
    }
  }
}

TEST_CASE("euler_number on canonical shapes") {
  std::mt19937 rng(109);
  const BinaryImage blob = helpers::random_blobs(16, 16, 1, rng);
  if (blob.foreground_count() > 0) CHECK(euler_number(blob) == 1);

  const BinaryImage ring = make_mask(5, 5,
                                     {0, 0, 0, 0, 0,
                                      0, 1, 1, 1, 0,
                                      0, 1, 0, 1, 0,
                                      0, 1, 1, 1, 0,
                                      0, 0, 0, 0, 0});
  CHECK(euler_number(ring) == 0);

  // Two blobs, one carrying a hole: 2 components - 1 hole = 1.
  BinaryImage two(12, 6);
  for (int y = 1; y <= 3; ++y) {
    for (int x = 1; x <= 3; ++x) two.set(x, y, true);
  }
  two.set(2, 2, false);  // hole
  two.set(8, 2, true);
  two.set(9, 2, true);
  CHECK(euler_number(two) == 1);
}

TEST_CASE("euler_number equals components minus holes on random masks") {
  std::mt19937 rng(113);
  for (int trial = 0; trial < 60; ++trial) {
    const BinaryImage mask = trial % 2 == 0 ? helpers::random_mask(18, 14, 0.4, rng)
                                            : helpers::random_blobs(18, 14, 4, rng);
    const int components = connected_components(mask, 8).component_count;
    // Holes: 4-connected background regions not reachable from the border.
    const BinaryImage filled = fill_holes(mask);
    BinaryImage holes(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
      for (int x = 0; x < mask.width(); ++x) {
        holes.set(x, y, filled.get(x, y) && !mask.get(x, y));
      }
    }
    const int hole_count = connected_components(holes, 4).component_count;
    REQUIRE(euler_number(mask) == components - hole_count);
  }
}

TEST_CASE("box_dilate grows by the Chebyshev radius") {
  BinaryImage dot(7, 7);
  dot.set(3, 3, true);
  const BinaryImage grown = box_dilate(dot, 2);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 7; ++x) {
      CHECK(grown.get(x, y) == (std::abs(x - 3) <= 2 && std::abs(y - 3) <= 2));
    }
  }
  CHECK(box_dilate(dot, 0) == dot);
}

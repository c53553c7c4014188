// Copyright 2026 The pfuse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <random>

#include "pfuse/error.hpp"
#include "pfuse/mask.hpp"
#include "pfuse/raster.hpp"

using namespace pfuse;

namespace {

BinaryMask rect(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h);
  MaskArray bits = m.bits();
  bits.block(y0, x0, y1 - y0, x1 - x0).setConstant(true);
  return BinaryMask(bits);
}

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double p) {
  std::bernoulli_distribution bit(p);
  MaskArray bits(h, w);
  for (int j = 0; j < w; ++j)
    for (int i = 0; i < h; ++i) bits(i, j) = bit(rng);
  return BinaryMask(bits);
}

CategoryTable table() {
  return CategoryTable({{1, "person", true}, {7, "sky", false}});
}

}  // namespace

TEST_CASE("covered pixels use centers in [lo, hi)") {
  auto s = covered_pixels(0.0, 2.0, 10);
  CHECK(s.begin == 0);
  CHECK(s.end == 2);
  s = covered_pixels(0.6, 1.5, 10);
  CHECK(s.size() == 0);
  s = covered_pixels(0.5, 1.5, 10);
  CHECK(s.begin == 0);
  CHECK(s.end == 1);
  s = covered_pixels(-3.0, 40.0, 10);
  CHECK(s.begin == 0);
  CHECK(s.end == 10);
}

TEST_CASE("clamp_box") {
  CHECK(*clamp_box({-1, 2, 5, 9}, 4, 6) == Box{0, 2, 4, 6});
  CHECK_FALSE(clamp_box({4, 0, 6, 2}, 4, 6));
}

TEST_CASE("BinaryMask") {
  CHECK_THROWS_AS(BinaryMask(0, 3), Error);
  auto m = rect(5, 4, 1, 1, 3, 4);
  CHECK(m.area() == 6);
  CHECK(*m.bounding_box() == Box{1, 1, 3, 4});
  CHECK_FALSE(BinaryMask(3, 3).bounding_box());
  CHECK(BinaryMask(3, 3).empty());
}

TEST_CASE("mask IoU and intersection") {
  auto a = rect(4, 4, 0, 0, 2, 2);
  CHECK(mask_iou(a, a) == 1.0);
  CHECK(mask_iou(a, rect(4, 4, 2, 2, 4, 4)) == 0.0);
  CHECK(mask_iou(BinaryMask(4, 4), BinaryMask(4, 4)) == 0.0);
  CHECK(mask_iou(rect(2, 1, 0, 0, 1, 1), rect(2, 1, 0, 0, 2, 1)) == 0.5);

  CHECK(mask_intersection_area(a, rect(4, 4, 2, 2, 4, 4)) == 0);
  CHECK(mask_intersection_area(rect(4, 4, 1, 1, 2, 2), a) == 1);
  // Two 3x3 squares sharing a 1x3 strip.
  CHECK(mask_intersection_area(rect(5, 3, 0, 0, 3, 3),
                               rect(5, 3, 2, 0, 5, 3)) == 3);
  CHECK_THROWS_AS(mask_iou(a, BinaryMask(3, 4)), Error);
}

TEST_CASE("RLE") {
  CHECK(rle_encode(BinaryMask(4, 4)) == std::vector<std::uint32_t>{16});
  CHECK(rle_encode(rect(4, 4, 0, 0, 4, 4)) ==
        std::vector<std::uint32_t>{0, 16});
  // Column-major: first column is (0, 1, 1), second (0, 0, 0).
  CHECK(rle_encode(rect(2, 3, 0, 1, 1, 3)) ==
        std::vector<std::uint32_t>{1, 2, 3});

  SUBCASE("exhaustive 3x3") {
    for (int bits = 0; bits < 512; ++bits) {
      MaskArray a(3, 3);
      for (int k = 0; k < 9; ++k) a(k % 3, k / 3) = (bits >> k) & 1;
      BinaryMask m(a);
      auto runs = rle_encode(m);
      REQUIRE(rle_decode(runs, 3, 3) == m);
    }
  }
  SUBCASE("random round trips") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 1000; ++t) {
      const int w = 1 + int(rng() % 20), h = 1 + int(rng() % 20);
      auto m = random_mask(rng, w, h, 0.1 + 0.8 * (t % 7) / 6.0);
      REQUIRE(rle_decode(rle_encode(m), w, h) == m);
    }
  }
  SUBCASE("bad runs") {
    const std::vector<std::uint32_t> runs{3, 4};
    CHECK_THROWS_AS(rle_decode(runs, 2, 2), Error);
  }
}

TEST_CASE("RgbImage") {
  const std::vector<std::uint8_t> bytes{1, 2, 3, 4, 5, 6};
  auto img = RgbImage::from_interleaved(2, 1, bytes);
  CHECK(img.pixel(0, 1) == Eigen::Vector3d(4, 5, 6));
  CHECK(img.to_interleaved() == bytes);
  RgbImage::Plane bad = RgbImage::Plane::Constant(1, 1, 300.0f);
  CHECK_THROWS_AS(RgbImage(bad, bad, bad), Error);
}

TEST_CASE("CategoryTable") {
  auto t = table();
  CHECK(t.is_thing(1));
  CHECK_FALSE(t.is_thing(7));
  CHECK(t.find(3) == nullptr);
  CHECK(t.all().front().id == 1);
  CHECK_THROWS_AS(CategoryTable({{0, "void", false}}), Error);
  CHECK_THROWS_AS(CategoryTable({{2, "a", false}, {2, "b", true}}), Error);
}

TEST_CASE("SemanticMap rejects unknown labels") {
  LabelRaster labels = LabelRaster::Constant(2, 2, 7);
  CHECK_NOTHROW(SemanticMap(labels, table()));
  labels(0, 0) = 3;
  CHECK_THROWS_AS(SemanticMap(labels, table()), Error);
}

TEST_CASE("PanopticMap validation") {
  LabelRaster ids(2, 2);
  ids << 1, 1, 0, 2;
  PanopticMap ok(ids, {{1, 1, 2}, {2, 7, 1}}, table());
  CHECK(ok.void_area() == 1);
  CHECK(ok.segment_mask(1).area() == 2);
  CHECK(ok.category_raster()(1, 1) == 7);
  CHECK(ok.find(3) == nullptr);

  CHECK_THROWS_AS(PanopticMap(ids, {{1, 1, 2}}, table()), Error);
  CHECK_THROWS_AS(PanopticMap(ids, {{1, 1, 3}, {2, 7, 1}}, table()), Error);
  CHECK_THROWS_AS(PanopticMap(ids, {{1, 1, 2}, {2, 5, 1}}, table()), Error);
  CHECK_THROWS_AS(
      PanopticMap(ids, {{1, 1, 2}, {2, 7, 1}, {3, 7, 0}}, table()), Error);

  auto built = PanopticMap::from_raster(ids, {{1, 1}, {2, 7}}, table());
  CHECK(built == ok);
  CHECK_THROWS_AS(PanopticMap::from_raster(ids, {{1, 1}}, table()), Error);
}

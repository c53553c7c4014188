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

#include "pfuse/error.hpp"
#include "pfuse/fusion.hpp"
#include "pfuse/synthetic.hpp"

using namespace pfuse;

namespace {

CategoryTable cats() {
  return CategoryTable(
      {{1, "car", true}, {2, "road", false}, {3, "sky", false},
       {4, "person", true}});
}

BinaryMask rect(int w, int h, int x0, int y0, int x1, int y1) {
  MaskArray bits = MaskArray::Constant(h, w, false);
  bits.block(y0, x0, y1 - y0, x1 - x0).setConstant(true);
  return BinaryMask(bits);
}

ResolvedScene scene_of(int w, int h, std::vector<InstancePrediction> in) {
  return resolve_scene(RgbImage(w, h), in);
}

}  // namespace

TEST_CASE("stuff only") {
  SemanticMap sem(LabelRaster::Constant(64, 64, 2), cats());
  auto map = fuse(scene_of(64, 64, {}), sem);
  REQUIRE(map.segments().size() == 1);
  CHECK(map.segments()[0] == Segment{1, 2, 4096});
  CHECK(map.void_area() == 0);
}

TEST_CASE("instances overwrite stuff and ids are dense") {
  LabelRaster labels = LabelRaster::Constant(80, 80, 2);
  labels.topRows(40).setConstant(3);
  SemanticMap sem(labels, cats());
  auto scene = scene_of(80, 80,
                        {make_instance(7, rect(80, 80, 0, 0, 10, 10), 0.7, 1),
                         make_instance(9, rect(80, 80, 30, 30, 50, 50), 0.9, 4)});
  FusionConfig cfg;
  cfg.stuff_area_floor = 0;
  auto map = fuse(scene, sem, cfg);
  const auto segs = map.segments();
  REQUIRE(segs.size() == 4);
  CHECK(segs[0] == Segment{1, 4, 400});
  CHECK(segs[1] == Segment{2, 1, 100});
  CHECK(segs[2] == Segment{3, 2, 3200 - 200});
  CHECK(segs[3] == Segment{4, 3, 3200 - 100 - 200});
  CHECK(map.segment_ids()(35, 35) == 1);
  CHECK(map.segment_ids()(5, 5) == 2);
}

TEST_CASE("stuff floor is strict") {
  // 64 x 64 = 4096 of road survives; 4095 after an instance takes a pixel
  // does not.
  LabelRaster labels = LabelRaster::Constant(64, 128, 3);
  labels.leftCols(64).setConstant(2);
  SemanticMap sem(labels, cats());
  auto map = fuse(scene_of(128, 64, {}), sem);
  CHECK(map.segments().size() == 2);

  auto scene =
      scene_of(128, 64, {make_instance(0, rect(128, 64, 0, 0, 1, 1), 0.9, 1)});
  auto cut = fuse(scene, sem);
  REQUIRE(cut.segments().size() == 2);
  CHECK(cut.segments()[0].category_id == 1);
  CHECK(cut.segments()[1].category_id == 3);
  CHECK(cut.void_area() == 4095);

  FusionConfig off;
  off.stuff_area_floor = 0;
  CHECK(fuse(scene, sem, off).segments().size() == 3);
}

TEST_CASE("thing labels in the semantic map become void") {
  LabelRaster labels = LabelRaster::Constant(64, 70, 2);
  labels.rightCols(6).setConstant(4);
  SemanticMap sem(labels, cats());
  auto map = fuse(scene_of(70, 64, {}), sem);
  CHECK(map.void_area() == 6 * 64);
  CHECK(map.segments().size() == 1);
}

TEST_CASE("dimension mismatch") {
  SemanticMap sem(LabelRaster::Constant(8, 8, 2), cats());
  CHECK_THROWS_AS(fuse(scene_of(9, 8, {}), sem), Error);
}

TEST_CASE("fusion invariants on clutter") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto synth = generate_synthetic_scene(random_clutter_spec(seed, 96, 96),
                                          seed);
    auto kept = filter_and_nms(synth.instances);
    auto scene = resolve_scene(synth.image, kept);
    FusionConfig cfg;
    cfg.stuff_area_floor = 1000;
    auto map = fuse(scene, synth.semantic, cfg);
    CAPTURE(seed);

    std::int64_t total = map.void_area();
    for (const auto& s : map.segments()) {
      total += s.area;
      if (!map.categories().is_thing(s.category_id)) {
        REQUIRE(s.area >= cfg.stuff_area_floor);
      }
    }
    REQUIRE(total == 96 * 96);
    REQUIRE(int(map.segments().size()) >= int(scene.kept.size()));
    // Segment k (1-based) for k <= kept is an instance with exactly its
    // owned pixels.
    for (std::size_t k = 0; k < scene.kept.size(); ++k) {
      const auto seg = map.segment_mask(std::int32_t(k) + 1);
      bool found = false;
      for (int id : scene.kept) found = found || scene.owned_mask(id) == seg;
      REQUIRE(found);
    }

    // Re-fusing the output gives the same map.
    SemanticMap again(map.category_raster(), map.categories());
    auto refused = fuse(scene, again, cfg);
    REQUIRE(refused == map);
  }
}

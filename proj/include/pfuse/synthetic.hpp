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

#ifndef PFUSE_SYNTHETIC_HPP_
#define PFUSE_SYNTHETIC_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "pfuse/occlusion.hpp"
#include "pfuse/raster.hpp"

namespace pfuse {

enum class Shape { kRectangle, kEllipse };

// Boxes use integer pixel bounds; an object covers the pixels whose centers
// fall inside its shape.
struct ObjectSpec {
  Shape shape = Shape::kRectangle;
  Box box;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  std::int32_t category = 0;
  double score = 1.0;
};

struct StuffSpec {
  Box box;
  std::int32_t category = 0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
};

struct SceneSpec {
  int width = 0;
  int height = 0;
  CategoryTable categories;
  std::int32_t background_category = 0;  // stuff class
  Eigen::Vector3d background_color = Eigen::Vector3d::Zero();
  std::vector<StuffSpec> stuff;     // painted over the background, in order
  std::vector<ObjectSpec> objects;  // back to front
  int noise = 0;                    // uniform integer jitter per channel
};

struct SyntheticScene {
  RgbImage image;
  std::vector<InstancePrediction> instances;  // full (amodal) masks
  PanopticMap ground_truth;
  SemanticMap semantic;
  // Front -> back for every pair of objects whose masks intersect.
  std::vector<Relation> occlusions;
};

// Renders the spec; `seed` drives only the color jitter.
SyntheticScene generate_synthetic_scene(const SceneSpec& spec,
                                        std::uint64_t seed);

// Default table used by the random specs: 1 "object" (thing),
// 2 "wall" and 3 "floor" (stuff), 4 "patch" (stuff).
CategoryTable synthetic_categories();

// 2 or 3 rectangles in distinct colors (pairwise RGB cosine below 0.9),
// where every intersecting pair overlaps by more than a quarter of the
// smaller object, no pixel lies in three objects and every object keeps more
// than 60% of its area visible.
SceneSpec random_occlusion_spec(int objects, std::uint64_t seed,
                                int width = 64, int height = 64);

// Several freely overlapping rectangles and ellipses with random colors and
// scores.
SceneSpec random_clutter_spec(std::uint64_t seed, int width = 64,
                              int height = 64);

}  // namespace pfuse

#endif  // PFUSE_SYNTHETIC_HPP_

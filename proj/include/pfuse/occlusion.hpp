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

#ifndef PFUSE_OCCLUSION_HPP_
#define PFUSE_OCCLUSION_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "pfuse/mask.hpp"
#include "pfuse/raster.hpp"

namespace pfuse {

struct InstancePrediction {
  int id = 0;
  BinaryMask mask;
  double score = 0.0;
  std::int32_t category = 0;
  Box box;
};

// Builds a prediction with its box taken from the mask; validates score and
// mask.
InstancePrediction make_instance(int id, BinaryMask mask, double score,
                                 std::int32_t category);

struct OcclusionConfig {
  double score_floor = 0.6;    // keep candidates scoring strictly above
  double nms_iou = 0.5;        // suppress when mask IoU strictly above
  double overlap_ratio = 0.2;  // occluded pair when overlap > ratio * area
  double removal_ratio = 0.5;  // remove when retained area <= ratio * area
};

// Throws pfuse::Error unless every ratio lies in [0, 1].
void validate(const OcclusionConfig& config);

struct OccludedPair {
  int a = 0;  // instance ids, a < b
  int b = 0;
  BinaryMask overlap;
  double pair_score = 0.0;  // max(score_a, score_b)
};

// Directed occlusion relation: `winner` is in front of `loser`.
struct Relation {
  int winner = 0;
  int loser = 0;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct ResolvedScene {
  int width = 0;
  int height = 0;
  // Instances the scene was resolved from (post-NMS), indexed by position.
  std::vector<InstancePrediction> instances;
  // Owning instance id per pixel, or kNoOwner.
  LabelRaster owner;
  std::vector<int> kept;     // ascending ids
  std::vector<int> removed;  // in removal order
  std::vector<Relation> relations;
  std::vector<Relation> set_aside;  // required direction that was rejected
  int pairs_resolved = 0;

  static constexpr std::int32_t kNoOwner = -1;

  const InstancePrediction* instance(int id) const;
  BinaryMask owned_mask(int id) const;
};

// Drops candidates at or below the score floor, then greedy class-agnostic
// mask NMS in descending score order (ties: lower id first).
std::vector<InstancePrediction> filter_and_nms(
    std::span<const InstancePrediction> candidates,
    const OcclusionConfig& config = {});

// Unordered pairs whose overlap exceeds overlap_ratio of either instance,
// ordered by (a, b).
std::vector<OccludedPair> find_occluded_pairs(
    std::span<const InstancePrediction> instances,
    const OcclusionConfig& config = {});

// Cosine similarity of two RGB vectors; 0 when exactly one is zero, 1 when
// both are.
double rgb_cosine(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

// Mean RGB over the region.
Eigen::Vector3d mean_rgb(const RgbImage& image, const BinaryMask& region);

// Mean over pixels x in `pixel_set` of cos(RGB(x), mean RGB of
// `instance_region`).
double appearance_similarity(const RgbImage& image, const BinaryMask& pixel_set,
                             const BinaryMask& instance_region);

// Occlusion resolution: occluded pairs are visited in descending pair score
// and each overlap goes wholesale to the instance it resembles more;
// contradictory pairs are set aside; remaining shared pixels go to the higher
// score; instances keeping no more than removal_ratio of their area are
// dropped and the scene is resolved again without them.
ResolvedScene resolve_scene(const RgbImage& image,
                            std::span<const InstancePrediction> instances,
                            const OcclusionConfig& config = {});

}  // namespace pfuse

#endif  // PFUSE_OCCLUSION_HPP_

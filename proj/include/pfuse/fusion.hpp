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

#ifndef PFUSE_FUSION_HPP_
#define PFUSE_FUSION_HPP_

#include <cstdint>

#include "pfuse/occlusion.hpp"
#include "pfuse/raster.hpp"

namespace pfuse {

struct FusionConfig {
  std::int64_t stuff_area_floor = 4096;  // stuff segments below become void
  std::int32_t void_category = kVoid;
};

// Merges a resolved instance scene with a semantic map. Kept instances
// overwrite stuff; thing labels of the semantic map are not used; one segment
// per stuff category; stuff segments under the area floor become void.
// Segment ids are dense: instances by descending score (ties: lower id), then
// stuff by ascending category id.
PanopticMap fuse(const ResolvedScene& scene, const SemanticMap& semantic,
                 const FusionConfig& config = {});

}  // namespace pfuse

#endif  // PFUSE_FUSION_HPP_

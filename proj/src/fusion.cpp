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

#include "pfuse/fusion.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "pfuse/error.hpp"

namespace pfuse {

PanopticMap fuse(const ResolvedScene& scene, const SemanticMap& semantic,
                 const FusionConfig& config) {
  if (config.stuff_area_floor < 0) {
    throw Error("stuff_area_floor must be >= 0");
  }
  if (config.void_category != kVoid) {
    throw Error("void category must be 0");
  }
  if (scene.width != semantic.width() || scene.height != semantic.height()) {
    throw Error("fuse: scene is " + std::to_string(scene.width) + "x" +
                std::to_string(scene.height) + ", semantic map is " +
                std::to_string(semantic.width()) + "x" +
                std::to_string(semantic.height()));
  }
  const CategoryTable& categories = semantic.categories();
  const int h = scene.height, w = scene.width;

  std::vector<const InstancePrediction*> kept;
  for (int id : scene.kept) {
    const auto* inst = scene.instance(id);
    if (inst == nullptr) throw InvariantViolation("kept id without instance");
    if (!categories.is_thing(inst->category)) {
      throw Error("instance " + std::to_string(id) + " has category " +
                  std::to_string(inst->category) + ", not a thing class");
    }
    kept.push_back(inst);
  }
  std::sort(kept.begin(), kept.end(), [](const auto* a, const auto* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->id < b->id;
  });

  LabelRaster ids = LabelRaster::Constant(h, w, kVoid);
  std::map<std::int32_t, std::int32_t> category_of;
  std::int32_t next_id = 1;
  for (const auto* inst : kept) {
    const auto owned = scene.owner == inst->id;
    if (!owned.any()) continue;
    ids = owned.select(LabelRaster::Constant(h, w, next_id), ids);
    category_of[next_id] = inst->category;
    ++next_id;
  }

  // Stuff fills what instances left, then small stuff areas become void.
  const LabelRaster& labels = semantic.labels();
  std::map<std::int32_t, std::int64_t> stuff_area;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const auto label = labels.data()[i];
    if (ids.data()[i] != kVoid || label == kVoid) continue;
    if (categories.is_thing(label)) continue;
    ++stuff_area[label];
  }
  std::map<std::int32_t, std::int32_t> stuff_segment;
  for (const auto& [category, area] : stuff_area) {
    if (area < config.stuff_area_floor) continue;
    stuff_segment[category] = next_id;
    category_of[next_id] = category;
    ++next_id;
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (ids.data()[i] != kVoid) continue;
    auto it = stuff_segment.find(labels.data()[i]);
    if (it != stuff_segment.end()) ids.data()[i] = it->second;
  }

  try {
    return PanopticMap::from_raster(std::move(ids), category_of, categories);
  } catch (const Error& e) {
    throw InvariantViolation(std::string("fuse produced an invalid map: ") +
                             e.what());
  }
}

}  // namespace pfuse

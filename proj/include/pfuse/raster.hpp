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

#ifndef PFUSE_RASTER_HPP_
#define PFUSE_RASTER_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pfuse/mask.hpp"

namespace pfuse {

// H x W x 3 color raster, one float plane per channel, values in [0, 255].
class RgbImage {
 public:
  using Plane = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic>;

  RgbImage(int width, int height);
  RgbImage(Plane r, Plane g, Plane b);

  // Row-major interleaved RGB bytes, as decoded from an 8-bit PNG.
  static RgbImage from_interleaved(int width, int height,
                                   std::span<const std::uint8_t> rgb);

  int width() const { return static_cast<int>(planes_[0].cols()); }
  int height() const { return static_cast<int>(planes_[0].rows()); }

  const Plane& plane(int channel) const { return planes_[channel]; }
  Eigen::Vector3d pixel(int row, int col) const {
    return {planes_[0](row, col), planes_[1](row, col), planes_[2](row, col)};
  }

  std::vector<std::uint8_t> to_interleaved() const;

 private:
  std::array<Plane, 3> planes_;
};

struct Category {
  std::int32_t id = 0;
  std::string name;
  bool is_thing = false;

  friend bool operator==(const Category&, const Category&) = default;
};

// Sorted by id; ids are unique and never kVoid.
class CategoryTable {
 public:
  CategoryTable() = default;
  explicit CategoryTable(std::vector<Category> categories);

  const Category* find(std::int32_t id) const;
  bool contains(std::int32_t id) const { return find(id) != nullptr; }
  bool is_thing(std::int32_t id) const;
  std::span<const Category> all() const { return categories_; }
  bool empty() const { return categories_.empty(); }

  friend bool operator==(const CategoryTable&, const CategoryTable&) = default;

 private:
  std::vector<Category> categories_;
};

class SemanticMap {
 public:
  SemanticMap(LabelRaster labels, CategoryTable categories);

  int width() const { return static_cast<int>(labels_.cols()); }
  int height() const { return static_cast<int>(labels_.rows()); }
  const LabelRaster& labels() const { return labels_; }
  const CategoryTable& categories() const { return categories_; }

 private:
  LabelRaster labels_;
  CategoryTable categories_;
};

struct Segment {
  std::int32_t id = 0;
  std::int32_t category_id = 0;
  std::int64_t area = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Per-pixel segment ids plus the segment table. Construction validates the
// raster/table bijection and the declared areas.
class PanopticMap {
 public:
  PanopticMap(LabelRaster segment_ids, std::vector<Segment> segments,
              CategoryTable categories);

  // Builds the table from the raster; `category_of` maps every nonzero id.
  static PanopticMap from_raster(
      LabelRaster segment_ids,
      const std::map<std::int32_t, std::int32_t>& category_of,
      CategoryTable categories);

  int width() const { return static_cast<int>(ids_.cols()); }
  int height() const { return static_cast<int>(ids_.rows()); }
  const LabelRaster& segment_ids() const { return ids_; }
  // Sorted by segment id.
  std::span<const Segment> segments() const { return segments_; }
  const Segment* find(std::int32_t segment_id) const;
  const CategoryTable& categories() const { return categories_; }

  std::int64_t void_area() const { return (ids_ == kVoid).count(); }
  BinaryMask segment_mask(std::int32_t segment_id) const;
  // Per-pixel category id (kVoid on void pixels).
  LabelRaster category_raster() const;

  friend bool operator==(const PanopticMap& a, const PanopticMap& b) {
    return a.width() == b.width() && a.height() == b.height() &&
           (a.ids_ == b.ids_).all() && a.segments_ == b.segments_ &&
           a.categories_ == b.categories_;
  }

 private:
  LabelRaster ids_;
  std::vector<Segment> segments_;
  CategoryTable categories_;
};

}  // namespace pfuse

#endif  // PFUSE_RASTER_HPP_

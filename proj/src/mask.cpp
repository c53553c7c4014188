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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "pfuse/error.hpp"
#include "pfuse/mask.hpp"
#include "pfuse/raster.hpp"

namespace pfuse {

namespace {

void require_positive_dims(int width, int height, const char* what) {
  if (width < 1 || height < 1) {
    throw Error(std::string(what) + ": dimensions must be positive, got " +
                std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

std::optional<Box> clamp_box(const Box& box, int width, int height) {
  Box out{std::clamp(box.x0, 0.0, double(width)),
          std::clamp(box.y0, 0.0, double(height)),
          std::clamp(box.x1, 0.0, double(width)),
          std::clamp(box.y1, 0.0, double(height))};
  if (!out.valid()) return std::nullopt;
  return out;
}

PixelSpan covered_pixels(double lo, double hi, int limit) {
  const int begin = static_cast<int>(std::ceil(lo - 0.5));
  const int end = static_cast<int>(std::ceil(hi - 0.5));
  return {std::clamp(begin, 0, limit), std::clamp(end, 0, limit)};
}

BinaryMask::BinaryMask(int width, int height) {
  require_positive_dims(width, height, "BinaryMask");
  bits_ = MaskArray::Constant(height, width, false);
}

BinaryMask::BinaryMask(MaskArray bits) : bits_(std::move(bits)) {
  require_positive_dims(width(), this->height(), "BinaryMask");
}

std::optional<Box> BinaryMask::bounding_box() const {
  const auto cols = bits_.colwise().any();
  const auto rows = bits_.rowwise().any();
  int c0 = -1, c1 = -1, r0 = -1, r1 = -1;
  for (int c = 0; c < width(); ++c) {
    if (cols(c)) {
      if (c0 < 0) c0 = c;
      c1 = c;
    }
  }
  if (c0 < 0) return std::nullopt;
  for (int r = 0; r < height(); ++r) {
    if (rows(r)) {
      if (r0 < 0) r0 = r;
      r1 = r;
    }
  }
  return Box{double(c0), double(r0), double(c1 + 1), double(r1 + 1)};
}

void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error("mask dimension mismatch: " + std::to_string(a.width()) + "x" +
                std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                "x" + std::to_string(b.height()));
  }
}

std::int64_t mask_intersection_area(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  return (a.bits() && b.bits()).count();
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  const auto inter = (a.bits() && b.bits()).count();
  const auto uni = (a.bits() || b.bits()).count();
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

std::vector<std::uint32_t> rle_encode(const BinaryMask& mask) {
  std::vector<std::uint32_t> runs;
  const bool* data = mask.bits().data();
  const auto n = mask.bits().size();
  bool current = false;
  std::uint32_t run = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data[i] != current) {
      runs.push_back(run);
      run = 0;
      current = data[i];
    }
    ++run;
  }
  runs.push_back(run);
  return runs;
}

BinaryMask rle_decode(std::span<const std::uint32_t> runs, int width,
                      int height) {
  require_positive_dims(width, height, "rle_decode");
  const std::uint64_t total =
      std::accumulate(runs.begin(), runs.end(), std::uint64_t{0});
  const std::uint64_t expected = std::uint64_t(width) * std::uint64_t(height);
  if (total != expected) {
    throw Error("rle_decode: runs sum to " + std::to_string(total) +
                ", expected " + std::to_string(expected));
  }
  MaskArray bits(height, width);
  bool* out = bits.data();
  bool value = false;
  for (const auto run : runs) {
    std::fill_n(out, run, value);
    out += run;
    value = !value;
  }
  return BinaryMask(std::move(bits));
}

// ---------------------------------------------------------------------------

RgbImage::RgbImage(int width, int height) {
  require_positive_dims(width, height, "RgbImage");
  for (auto& p : planes_) p = Plane::Zero(height, width);
}

RgbImage::RgbImage(Plane r, Plane g, Plane b)
    : planes_{std::move(r), std::move(g), std::move(b)} {
  require_positive_dims(width(), height(), "RgbImage");
  for (const auto& p : planes_) {
    if (p.rows() != height() || p.cols() != width()) {
      throw Error("RgbImage: channel planes differ in size");
    }
    if ((p < 0.0f).any() || (p > 255.0f).any()) {
      throw Error("RgbImage: channel value outside [0, 255]");
    }
  }
}

RgbImage RgbImage::from_interleaved(int width, int height,
                                    std::span<const std::uint8_t> rgb) {
  require_positive_dims(width, height, "RgbImage");
  if (rgb.size() != std::size_t(width) * std::size_t(height) * 3) {
    throw Error("RgbImage: expected " + std::to_string(width * height * 3) +
                " bytes, got " + std::to_string(rgb.size()));
  }
  RgbImage img(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const std::size_t base = (std::size_t(r) * width + c) * 3;
      for (int k = 0; k < 3; ++k) img.planes_[k](r, c) = rgb[base + k];
    }
  }
  return img;
}

std::vector<std::uint8_t> RgbImage::to_interleaved() const {
  std::vector<std::uint8_t> out(std::size_t(width()) * height() * 3);
  for (int r = 0; r < height(); ++r) {
    for (int c = 0; c < width(); ++c) {
      const std::size_t base = (std::size_t(r) * width() + c) * 3;
      for (int k = 0; k < 3; ++k) {
        out[base + k] =
            static_cast<std::uint8_t>(std::lround(planes_[k](r, c)));
      }
    }
  }
  return out;
}

CategoryTable::CategoryTable(std::vector<Category> categories)
    : categories_(std::move(categories)) {
  std::sort(categories_.begin(), categories_.end(),
            [](const Category& a, const Category& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i].id == kVoid) {
      throw Error("category id 0 is reserved for void");
    }
    if (i > 0 && categories_[i].id == categories_[i - 1].id) {
      throw Error("duplicate category id " +
                  std::to_string(categories_[i].id));
    }
  }
}

const Category* CategoryTable::find(std::int32_t id) const {
  auto it = std::lower_bound(
      categories_.begin(), categories_.end(), id,
      [](const Category& c, std::int32_t v) { return c.id < v; });
  if (it == categories_.end() || it->id != id) return nullptr;
  return &*it;
}

bool CategoryTable::is_thing(std::int32_t id) const {
  const Category* c = find(id);
  return c != nullptr && c->is_thing;
}

SemanticMap::SemanticMap(LabelRaster labels, CategoryTable categories)
    : labels_(std::move(labels)), categories_(std::move(categories)) {
  require_positive_dims(width(), height(), "SemanticMap");
  for (Eigen::Index i = 0; i < labels_.size(); ++i) {
    const auto label = labels_.data()[i];
    if (label != kVoid && !categories_.contains(label)) {
      throw Error("SemanticMap: label " + std::to_string(label) +
                  " not in category table");
    }
  }
}

PanopticMap::PanopticMap(LabelRaster segment_ids, std::vector<Segment> segments,
                         CategoryTable categories)
    : ids_(std::move(segment_ids)),
      segments_(std::move(segments)),
      categories_(std::move(categories)) {
  require_positive_dims(width(), height(), "PanopticMap");
  std::sort(segments_.begin(), segments_.end(),
            [](const Segment& a, const Segment& b) { return a.id < b.id; });
  std::unordered_map<std::int32_t, std::int64_t> counts;
  for (Eigen::Index i = 0; i < ids_.size(); ++i) {
    const auto id = ids_.data()[i];
    if (id < 0) throw Error("PanopticMap: negative segment id");
    if (id != kVoid) ++counts[id];
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (s.id == kVoid) throw Error("PanopticMap: segment id 0 is void");
    if (i > 0 && s.id == segments_[i - 1].id) {
      throw Error("PanopticMap: duplicate segment id " + std::to_string(s.id));
    }
    if (!categories_.contains(s.category_id)) {
      throw Error("PanopticMap: segment " + std::to_string(s.id) +
                  " has unknown category " + std::to_string(s.category_id));
    }
    auto it = counts.find(s.id);
    const std::int64_t actual = it == counts.end() ? 0 : it->second;
    if (actual == 0) {
      throw Error("PanopticMap: segment " + std::to_string(s.id) +
                  " does not appear in the raster");
    }
    if (actual != s.area) {
      throw Error("PanopticMap: segment " + std::to_string(s.id) +
                  " declares area " + std::to_string(s.area) + " but covers " +
                  std::to_string(actual) + " pixels");
    }
  }
  if (counts.size() != segments_.size()) {
    throw Error("PanopticMap: raster holds segment ids missing from the table");
  }
}

PanopticMap PanopticMap::from_raster(
    LabelRaster segment_ids,
    const std::map<std::int32_t, std::int32_t>& category_of,
    CategoryTable categories) {
  std::map<std::int32_t, std::int64_t> counts;
  for (Eigen::Index i = 0; i < segment_ids.size(); ++i) {
    const auto id = segment_ids.data()[i];
    if (id != kVoid) ++counts[id];
  }
  std::vector<Segment> segments;
  segments.reserve(counts.size());
  for (const auto& [id, area] : counts) {
    auto it = category_of.find(id);
    if (it == category_of.end()) {
      throw Error("PanopticMap: no category for segment " + std::to_string(id));
    }
    segments.push_back({id, it->second, area});
  }
  return PanopticMap(std::move(segment_ids), std::move(segments),
                     std::move(categories));
}

const Segment* PanopticMap::find(std::int32_t segment_id) const {
  auto it = std::lower_bound(
      segments_.begin(), segments_.end(), segment_id,
      [](const Segment& s, std::int32_t v) { return s.id < v; });
  if (it == segments_.end() || it->id != segment_id) return nullptr;
  return &*it;
}

BinaryMask PanopticMap::segment_mask(std::int32_t segment_id) const {
  return BinaryMask(MaskArray(ids_ == segment_id));
}

LabelRaster PanopticMap::category_raster() const {
  LabelRaster out = LabelRaster::Constant(height(), width(), kVoid);
  std::unordered_map<std::int32_t, std::int32_t> lookup;
  for (const auto& s : segments_) lookup[s.id] = s.category_id;
  for (Eigen::Index i = 0; i < ids_.size(); ++i) {
    const auto id = ids_.data()[i];
    if (id != kVoid) out.data()[i] = lookup.at(id);
  }
  return out;
}

}  // namespace pfuse

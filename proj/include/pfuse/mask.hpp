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

#ifndef PFUSE_MASK_HPP_
#define PFUSE_MASK_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace pfuse {

// Rasters are Eigen arrays with rows = height and cols = width. The default
// column-major storage makes linear order match COCO's column-major RLE.
using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using LabelRaster = Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;

// Category id and segment id reserved for "no label".
inline constexpr std::int32_t kVoid = 0;

// Axis-aligned box in continuous image coordinates. Pixel (row i, col j)
// has its center at (j + 0.5, i + 0.5).
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool valid() const { return x1 > x0 && y1 > y0; }

  friend bool operator==(const Box&, const Box&) = default;
};

// Intersects the box with [0, width] x [0, height]; nullopt when nothing of
// positive extent remains.
std::optional<Box> clamp_box(const Box& box, int width, int height);

// Half-open range of integer pixel indices.
struct PixelSpan {
  int begin = 0;
  int end = 0;

  int size() const { return end > begin ? end - begin : 0; }
};

// Pixels along one axis whose centers k + 0.5 lie in [lo, hi), limited to
// [0, limit).
PixelSpan covered_pixels(double lo, double hi, int limit);

class BinaryMask {
 public:
  // All-zero mask.
  BinaryMask(int width, int height);
  explicit BinaryMask(MaskArray bits);

  int width() const { return static_cast<int>(bits_.cols()); }
  int height() const { return static_cast<int>(bits_.rows()); }
  std::int64_t area() const { return bits_.count(); }
  bool empty() const { return !bits_.any(); }

  bool operator()(int row, int col) const { return bits_(row, col); }
  const MaskArray& bits() const { return bits_; }

  // Tight box on pixel boundaries; nullopt for an empty mask.
  std::optional<Box> bounding_box() const;

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.width() == b.width() && a.height() == b.height() &&
           (a.bits_ == b.bits_).all();
  }

 private:
  MaskArray bits_;
};

// Throws pfuse::Error unless both masks have the same size.
void require_same_shape(const BinaryMask& a, const BinaryMask& b);

std::int64_t mask_intersection_area(const BinaryMask& a, const BinaryMask& b);

// |a & b| / |a | b|, 0 when both are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

// Uncompressed COCO RLE: column-major run lengths, alternating and starting
// with a (possibly empty) run of zeros.
std::vector<std::uint32_t> rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(std::span<const std::uint32_t> runs, int width,
                      int height);

}  // namespace pfuse

#endif  // PFUSE_MASK_HPP_

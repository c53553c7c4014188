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

#ifndef PFUSE_ROI_HPP_
#define PFUSE_ROI_HPP_

// Patch-cropping (RoIAlign) and patch-recovering (RoIInlay, RoIUpsample,
// Avg RoIUpsample) interpolation kernels.
//
// Feature rasters keep one row per pixel (row-major pixel order, index
// row * width + col) and one column per channel, so the per-pixel channel
// vector is contiguous. Kernels are templated on the stored scalar and on the
// accumulation scalar; geometry and weights are computed in double.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pfuse/error.hpp"
#include "pfuse/mask.hpp"

namespace pfuse {

template <typename Scalar>
using FeatureRows =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// m x m lattice of sampling points, one at the center of each bin.
struct SamplingGrid {
  Box box;
  int m = 1;
  double bin_w = 0.0;
  double bin_h = 0.0;

  double x(int col) const { return box.x0 + (col + 0.5) * bin_w; }
  double y(int row) const { return box.y0 + (row + 0.5) * bin_h; }
  Eigen::Vector2d point(int row, int col) const { return {x(col), y(row)}; }
};

inline SamplingGrid make_grid(const Box& box, int m) {
  if (m < 1) throw Error("make_grid: m must be >= 1, got " + std::to_string(m));
  if (!box.valid()) throw Error("make_grid: degenerate box");
  return {box, m, box.width() / m, box.height() / m};
}

// Clamps the box to [0, width] x [0, height] first.
inline SamplingGrid make_grid(const Box& box, int m, int width, int height) {
  auto clamped = clamp_box(box, width, height);
  if (!clamped) throw Error("make_grid: box degenerates after clamping");
  return make_grid(*clamped, m);
}

template <typename Scalar>
class FeatureMap {
 public:
  FeatureMap(int width, int height, int channels)
      : width_(width),
        height_(height),
        values_(FeatureRows<Scalar>::Zero(std::int64_t(width) * height,
                                          channels)) {}

  FeatureMap(int width, int height, FeatureRows<Scalar> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (values_.rows() != std::int64_t(width) * height) {
      throw Error("FeatureMap: value rows do not match width x height");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return static_cast<int>(values_.cols()); }
  bool empty() const { return values_.size() == 0; }

  std::int64_t index(int row, int col) const {
    return std::int64_t(row) * width_ + col;
  }
  auto pixel(int row, int col) { return values_.row(index(row, col)); }
  auto pixel(int row, int col) const { return values_.row(index(row, col)); }

  const FeatureRows<Scalar>& values() const { return values_; }
  FeatureRows<Scalar>& values() { return values_; }

 private:
  int width_;
  int height_;
  FeatureRows<Scalar> values_;
};

// Values sampled on a grid: row (r * m + c) holds the channels of point (r, c).
template <typename Scalar>
class FeaturePatch {
 public:
  FeaturePatch(SamplingGrid grid, FeatureRows<Scalar> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.rows() != std::int64_t(grid_.m) * grid_.m) {
      throw Error("FeaturePatch: expected m*m value rows");
    }
  }

  const SamplingGrid& grid() const { return grid_; }
  int m() const { return grid_.m; }
  int channels() const { return static_cast<int>(values_.cols()); }
  auto at(int row, int col) const { return values_.row(row * grid_.m + col); }
  const FeatureRows<Scalar>& values() const { return values_; }

 private:
  SamplingGrid grid_;
  FeatureRows<Scalar> values_;
};

// Per-pixel (sum, count) accumulation buffer shared by all restoring
// kernels. Averages are taken only at finalize time, so the result does not
// depend on the order in which patches were added.
template <typename Acc = double>
class Accumulator {
 public:
  using Counts = Eigen::Array<std::int64_t, Eigen::Dynamic, 1>;

  Accumulator(int width, int height, int channels)
      : width_(width),
        height_(height),
        sums_(FeatureRows<Acc>::Zero(std::int64_t(width) * height, channels)),
        counts_(Counts::Zero(std::int64_t(width) * height)) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return static_cast<int>(sums_.cols()); }
  std::int64_t index(int row, int col) const {
    return std::int64_t(row) * width_ + col;
  }

  const FeatureRows<Acc>& sums() const { return sums_; }
  FeatureRows<Acc>& sums() { return sums_; }
  const Counts& counts() const { return counts_; }
  Counts& counts() { return counts_; }

  void clear() {
    sums_.setZero();
    counts_.setZero();
  }

  // Adds another buffer's (sum, count); lets threads accumulate privately.
  void merge(const Accumulator& other) {
    if (other.width_ != width_ || other.height_ != height_ ||
        other.channels() != channels()) {
      throw Error("Accumulator::merge: shape mismatch");
    }
    sums_ += other.sums_;
    counts_ += other.counts_;
  }

 private:
  int width_;
  int height_;
  FeatureRows<Acc> sums_;
  Counts counts_;
};

namespace detail {

// Two lattice indices and their weights along one axis.
struct AxisTap {
  int lo = 0;
  int hi = 0;
  double w_lo = 1.0;
  double w_hi = 0.0;
};

// Weights of the relative-coordinate kernel G(a, x, b) = 1 - |a - x| / b for
// a pixel center `a` against the lattice origin + (k + 0.5) * bin, k < m.
// Coordinates outside the lattice hull are clamped to its boundary. The two
// nearest lattice points are used; an exact hit on a lattice point pairs it
// with its lower neighbour.
inline AxisTap inlay_tap(double a, double origin, double bin, int m) {
  auto lattice = [&](int k) { return origin + (k + 0.5) * bin; };
  if (m == 1) return {0, 0, 1.0, 0.0};
  const double clamped = std::clamp(a, lattice(0), lattice(m - 1));
  const double t = (clamped - origin) / bin - 0.5;
  int lo = static_cast<int>(std::floor(t));
  if (lo >= m - 1) {
    lo = m - 2;
  } else if (lo > 0 && t == double(lo)) {
    lo -= 1;
  }
  lo = std::clamp(lo, 0, m - 2);
  AxisTap tap{lo, lo + 1, 0.0, 0.0};
  tap.w_lo = std::max(0.0, 1.0 - std::abs(clamped - lattice(tap.lo)) / bin);
  tap.w_hi = std::max(0.0, 1.0 - std::abs(clamped - lattice(tap.hi)) / bin);
  const double total = tap.w_lo + tap.w_hi;
  if (total > 0.0) {
    tap.w_lo /= total;
    tap.w_hi /= total;
  } else {
    tap.w_lo = 1.0;
  }
  return tap;
}

// Standard bilinear taps of a continuous coordinate against pixel centers
// k + 0.5, k < size (RoIAlign forward and its gradient). Out-of-range
// coordinates clamp to the nearest pixel center.
inline AxisTap pixel_tap(double coord, int size) {
  double f = std::clamp(coord - 0.5, 0.0, double(size - 1));
  int lo = static_cast<int>(std::floor(f));
  AxisTap tap;
  if (lo >= size - 1) {
    lo = size - 1;
    tap = {lo, lo, 1.0, 0.0};
  } else {
    const double frac = f - lo;
    tap = {lo, lo + 1, 1.0 - frac, frac};
  }
  return tap;
}

template <typename Scalar, typename Acc>
void require_compatible(const SamplingGrid& grid,
                        const FeatureRows<Scalar>& values,
                        const Accumulator<Acc>& canvas, const char* what) {
  if (values.rows() != std::int64_t(grid.m) * grid.m) {
    throw Error(std::string(what) + ": expected m*m patch rows");
  }
  if (values.cols() != canvas.channels()) {
    throw Error(std::string(what) + ": patch has " +
                std::to_string(values.cols()) + " channels, canvas has " +
                std::to_string(canvas.channels()));
  }
}

}  // namespace detail

// Crops `src` on the grid: each sampling point is the bilinear interpolation
// of the four pixel centers around it.
template <typename Scalar>
FeaturePatch<Scalar> roi_align(const FeatureMap<Scalar>& src,
                               const SamplingGrid& grid) {
  if (src.empty() || src.width() < 1 || src.height() < 1) {
    throw Error("roi_align: empty source map");
  }
  if (!clamp_box(grid.box, src.width(), src.height())) {
    throw Error("roi_align: box does not intersect the image");
  }
  const int m = grid.m;
  std::vector<detail::AxisTap> xs(m), ys(m);
  for (int k = 0; k < m; ++k) {
    xs[k] = detail::pixel_tap(grid.x(k), src.width());
    ys[k] = detail::pixel_tap(grid.y(k), src.height());
  }
  using Wide = double;
  FeatureRows<Scalar> out(std::int64_t(m) * m, src.channels());
  for (int r = 0; r < m; ++r) {
    const auto& ty = ys[r];
    for (int c = 0; c < m; ++c) {
      const auto& tx = xs[c];
      out.row(r * m + c) =
          ((ty.w_lo * tx.w_lo) * src.pixel(ty.lo, tx.lo).template cast<Wide>() +
           (ty.w_lo * tx.w_hi) * src.pixel(ty.lo, tx.hi).template cast<Wide>() +
           (ty.w_hi * tx.w_lo) * src.pixel(ty.hi, tx.lo).template cast<Wide>() +
           (ty.w_hi * tx.w_hi) * src.pixel(ty.hi, tx.hi).template cast<Wide>())
              .template cast<Scalar>();
    }
  }
  return FeaturePatch<Scalar>(grid, std::move(out));
}

// Restores a patch into the canvas. Every pixel whose center lies in the
// patch box receives the separable relative-coordinate interpolation of its
// four nearest sampling points and one count.
template <typename Scalar, typename Acc>
void roi_inlay(const SamplingGrid& g, const FeatureRows<Scalar>& values,
               Accumulator<Acc>& canvas) {
  detail::require_compatible(g, values, canvas, "roi_inlay");
  const PixelSpan cols = covered_pixels(g.box.x0, g.box.x1, canvas.width());
  const PixelSpan rows = covered_pixels(g.box.y0, g.box.y1, canvas.height());
  if (cols.size() == 0 || rows.size() == 0) return;

  std::vector<detail::AxisTap> xs(cols.size());
  for (int j = cols.begin; j < cols.end; ++j) {
    xs[j - cols.begin] = detail::inlay_tap(j + 0.5, g.box.x0, g.bin_w, g.m);
  }
  const int m = g.m;
  const std::int64_t channels = values.cols();
  auto& sums = canvas.sums();
  auto& counts = canvas.counts();
  for (int i = rows.begin; i < rows.end; ++i) {
    const auto ty = detail::inlay_tap(i + 0.5, g.box.y0, g.bin_h, m);
    const Scalar* lo_row = values.data() + std::int64_t(ty.lo) * m * channels;
    const Scalar* hi_row = values.data() + std::int64_t(ty.hi) * m * channels;
    for (int j = cols.begin; j < cols.end; ++j) {
      const auto& tx = xs[j - cols.begin];
      const auto p = canvas.index(i, j);
      const Scalar* a = lo_row + std::int64_t(tx.lo) * channels;
      const Scalar* b = lo_row + std::int64_t(tx.hi) * channels;
      const Scalar* c = hi_row + std::int64_t(tx.lo) * channels;
      const Scalar* d = hi_row + std::int64_t(tx.hi) * channels;
      const Acc w00 = Acc(ty.w_lo * tx.w_lo), w01 = Acc(ty.w_lo * tx.w_hi);
      const Acc w10 = Acc(ty.w_hi * tx.w_lo), w11 = Acc(ty.w_hi * tx.w_hi);
      Acc* __restrict out = sums.data() + p * channels;
      for (std::int64_t q = 0; q < channels; ++q) {
        out[q] += w00 * Acc(a[q]) + w01 * Acc(b[q]) + w10 * Acc(c[q]) +
                  w11 * Acc(d[q]);
      }
      counts(p) += 1;
    }
  }
}

template <typename Scalar, typename Acc>
void roi_inlay(const FeaturePatch<Scalar>& patch, Accumulator<Acc>& canvas) {
  roi_inlay(patch.grid(), patch.values(), canvas);
}

// Scatters every sampling point to the four pixel centers around it with
// bilinear-gradient weights; values add. Each positive-weight scatter counts
// once, so pixels never reached keep count 0 ("holes").
template <typename Scalar, typename Acc>
void roi_upsample(const SamplingGrid& g, const FeatureRows<Scalar>& values,
                  Accumulator<Acc>& canvas) {
  detail::require_compatible(g, values, canvas, "roi_upsample");
  const int m = g.m;
  std::vector<detail::AxisTap> xs(m), ys(m);
  for (int k = 0; k < m; ++k) {
    xs[k] = detail::pixel_tap(g.x(k), canvas.width());
    ys[k] = detail::pixel_tap(g.y(k), canvas.height());
  }
  const std::int64_t channels = values.cols();
  auto& sums = canvas.sums();
  auto& counts = canvas.counts();
  auto row_of = [&](int row, int col) {
    return sums.data() + canvas.index(row, col) * channels;
  };
  auto count = [&](int row, int col, double w) {
    if (w > 0.0) counts(canvas.index(row, col)) += 1;
  };
  for (int r = 0; r < m; ++r) {
    const auto& ty = ys[r];
    for (int c = 0; c < m; ++c) {
      const auto& tx = xs[c];
      const Scalar* value = values.data() + std::int64_t(r * m + c) * channels;
      const Acc w00 = Acc(ty.w_lo * tx.w_lo), w01 = Acc(ty.w_lo * tx.w_hi);
      const Acc w10 = Acc(ty.w_hi * tx.w_lo), w11 = Acc(ty.w_hi * tx.w_hi);
      Acc* s00 = row_of(ty.lo, tx.lo);
      Acc* s01 = row_of(ty.lo, tx.hi);
      Acc* s10 = row_of(ty.hi, tx.lo);
      Acc* s11 = row_of(ty.hi, tx.hi);
      for (std::int64_t q = 0; q < channels; ++q) {
        const Acc v = Acc(value[q]);
        s00[q] += w00 * v;
        s01[q] += w01 * v;
        s10[q] += w10 * v;
        s11[q] += w11 * v;
      }
      count(ty.lo, tx.lo, ty.w_lo * tx.w_lo);
      count(ty.lo, tx.hi, ty.w_lo * tx.w_hi);
      count(ty.hi, tx.lo, ty.w_hi * tx.w_lo);
      count(ty.hi, tx.hi, ty.w_hi * tx.w_hi);
    }
  }
}

template <typename Scalar, typename Acc>
void roi_upsample(const FeaturePatch<Scalar>& patch, Accumulator<Acc>& canvas) {
  roi_upsample(patch.grid(), patch.values(), canvas);
}

// RoIUpsample with the per-pixel summation replaced by a weighted mean over
// the scatters this patch delivers. Each reached pixel then contributes one
// count, like roi_inlay, and is finalized with inlay_finalize.
template <typename Scalar, typename Acc>
void avg_roi_upsample(const SamplingGrid& g, const FeatureRows<Scalar>& values,
                      Accumulator<Acc>& canvas) {
  detail::require_compatible(g, values, canvas, "avg_roi_upsample");
  const int m = g.m;
  std::vector<detail::AxisTap> xs(m), ys(m);
  int x_min = canvas.width(), x_max = -1, y_min = canvas.height(), y_max = -1;
  for (int k = 0; k < m; ++k) {
    xs[k] = detail::pixel_tap(g.x(k), canvas.width());
    ys[k] = detail::pixel_tap(g.y(k), canvas.height());
    x_min = std::min(x_min, xs[k].lo);
    x_max = std::max(x_max, xs[k].hi);
    y_min = std::min(y_min, ys[k].lo);
    y_max = std::max(y_max, ys[k].hi);
  }
  const int local_w = x_max - x_min + 1;
  const int local_h = y_max - y_min + 1;
  FeatureRows<Acc> local =
      FeatureRows<Acc>::Zero(std::int64_t(local_w) * local_h, canvas.channels());
  Eigen::ArrayXd weight = Eigen::ArrayXd::Zero(std::int64_t(local_w) * local_h);
  auto scatter = [&](int row, int col, double w, const auto& value) {
    const auto q = std::int64_t(row - y_min) * local_w + (col - x_min);
    local.row(q) += w * value;
    weight(q) += w;
  };
  for (int r = 0; r < m; ++r) {
    const auto& ty = ys[r];
    for (int c = 0; c < m; ++c) {
      const auto& tx = xs[c];
      const auto value = values.row(r * m + c).template cast<Acc>();
      scatter(ty.lo, tx.lo, ty.w_lo * tx.w_lo, value);
      scatter(ty.lo, tx.hi, ty.w_lo * tx.w_hi, value);
      scatter(ty.hi, tx.lo, ty.w_hi * tx.w_lo, value);
      scatter(ty.hi, tx.hi, ty.w_hi * tx.w_hi, value);
    }
  }
  for (int i = 0; i < local_h; ++i) {
    for (int j = 0; j < local_w; ++j) {
      const auto q = std::int64_t(i) * local_w + j;
      if (weight(q) <= 0.0) continue;
      const auto p = canvas.index(y_min + i, x_min + j);
      canvas.sums().row(p) += local.row(q) / weight(q);
      canvas.counts()(p) += 1;
    }
  }
}

template <typename Scalar, typename Acc>
void avg_roi_upsample(const FeaturePatch<Scalar>& patch,
                      Accumulator<Acc>& canvas) {
  avg_roi_upsample(patch.grid(), patch.values(), canvas);
}

// Per-pixel mean sum / count; pixels with no contribution hold 0.
template <typename Scalar = float, typename Acc>
FeatureMap<Scalar> inlay_finalize(const Accumulator<Acc>& canvas) {
  FeatureMap<Scalar> out(canvas.width(), canvas.height(), canvas.channels());
  const auto& counts = canvas.counts();
  for (std::int64_t p = 0; p < counts.size(); ++p) {
    if (counts(p) > 0) {
      out.values().row(p) =
          (canvas.sums().row(p) / Acc(counts(p))).template cast<Scalar>();
    }
  }
  return out;
}

// Raw accumulated sums (RoIUpsample semantics).
template <typename Scalar = float, typename Acc>
FeatureMap<Scalar> sum_finalize(const Accumulator<Acc>& canvas) {
  return FeatureMap<Scalar>(canvas.width(), canvas.height(),
                            canvas.sums().template cast<Scalar>());
}

// Pixels with centers inside `box` (clamped to the canvas) that received no
// contribution.
template <typename Acc>
MaskArray hole_mask(const Accumulator<Acc>& canvas, const Box& box) {
  MaskArray holes = MaskArray::Constant(canvas.height(), canvas.width(), false);
  const PixelSpan cols = covered_pixels(box.x0, box.x1, canvas.width());
  const PixelSpan rows = covered_pixels(box.y0, box.y1, canvas.height());
  for (int i = rows.begin; i < rows.end; ++i) {
    for (int j = cols.begin; j < cols.end; ++j) {
      holes(i, j) = canvas.counts()(canvas.index(i, j)) == 0;
    }
  }
  return holes;
}

template <typename Acc>
std::int64_t hole_count(const Accumulator<Acc>& canvas, const Box& box) {
  return hole_mask(canvas, box).count();
}

}  // namespace pfuse

#endif  // PFUSE_ROI_HPP_

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

#ifndef PFUSE_TESTS_SUPPORT_HPP_
#define PFUSE_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracle.hpp"
#include "pfuse/roi.hpp"

namespace support {

// Random float raster in [0.1, 1) mirrored into an oracle raster, so both
// sides see identical inputs.
struct Pair {
  pfuse::FeatureMap<float> map;
  oracle::Raster ref;
};

inline Pair random_map(std::mt19937_64& rng, int w, int h, int c) {
  std::uniform_real_distribution<float> u(0.1f, 1.0f);
  Pair p{pfuse::FeatureMap<float>(w, h, c), oracle::Raster(w, h, c)};
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int k = 0; k < c; ++k) {
        const float v = u(rng);
        p.map.pixel(i, j)(k) = v;
        p.ref.at(i, j, k) = v;
      }
    }
  }
  return p;
}

inline pfuse::FeatureRows<float> random_patch(std::mt19937_64& rng, int m,
                                              int c) {
  std::uniform_real_distribution<float> u(0.1f, 1.0f);
  pfuse::FeatureRows<float> v(m * m, c);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = u(rng);
  return v;
}

inline std::vector<double> to_vector(const pfuse::FeatureRows<float>& v) {
  std::vector<double> out(v.size());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      out[r * v.cols() + k] = v(r, k);
    }
  }
  return out;
}

// Box with corners inside [0, w] x [0, h] and extent at least `min_extent`.
inline pfuse::Box random_box(std::mt19937_64& rng, int w, int h,
                             double min_extent = 0.25) {
  std::uniform_real_distribution<double> ux(0.0, w - min_extent);
  std::uniform_real_distribution<double> uy(0.0, h - min_extent);
  const double x0 = ux(rng), y0 = uy(rng);
  std::uniform_real_distribution<double> ex(min_extent, w - x0);
  std::uniform_real_distribution<double> ey(min_extent, h - y0);
  return {x0, y0, x0 + ex(rng), y0 + ey(rng)};
}

inline double rel_err(double got, double want) {
  const double scale = std::abs(want);
  return scale > 0.0 ? std::abs(got - want) / scale : std::abs(got);
}

}  // namespace support

#endif  // PFUSE_TESTS_SUPPORT_HPP_

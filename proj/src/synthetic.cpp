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

#include "pfuse/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "pfuse/error.hpp"

namespace pfuse {

namespace {

bool inside_image(const Box& b, int width, int height) {
  return b.valid() && b.x0 >= 0 && b.y0 >= 0 && b.x1 <= width &&
         b.y1 <= height;
}

MaskArray rasterize(Shape shape, const Box& b, int width, int height) {
  MaskArray bits = MaskArray::Constant(height, width, false);
  const double cx = 0.5 * (b.x0 + b.x1), cy = 0.5 * (b.y0 + b.y1);
  const double rx = 0.5 * b.width(), ry = 0.5 * b.height();
  const PixelSpan cols = covered_pixels(b.x0, b.x1, width);
  const PixelSpan rows = covered_pixels(b.y0, b.y1, height);
  for (int r = rows.begin; r < rows.end; ++r) {
    for (int c = cols.begin; c < cols.end; ++c) {
      if (shape == Shape::kRectangle) {
        bits(r, c) = true;
      } else {
        const double dx = (c + 0.5 - cx) / rx, dy = (r + 0.5 - cy) / ry;
        bits(r, c) = dx * dx + dy * dy <= 1.0;
      }
    }
  }
  return bits;
}

void paint(std::array<RgbImage::Plane, 3>& planes, const MaskArray& where,
           const Eigen::Vector3d& color) {
  for (int k = 0; k < 3; ++k) {
    planes[k] = where.select(float(color(k)), planes[k]);
  }
}

Eigen::Vector3d random_color(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> channel(20, 255);
  return {double(channel(rng)), double(channel(rng)), double(channel(rng))};
}

double cosine(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

}  // namespace

CategoryTable synthetic_categories() {
  return CategoryTable({{1, "object", true},
                        {2, "wall", false},
                        {3, "floor", false},
                        {4, "patch", false}});
}

SyntheticScene generate_synthetic_scene(const SceneSpec& spec,
                                        std::uint64_t seed) {
  const int w = spec.width, h = spec.height;
  if (w < 1 || h < 1) throw Error("scene: dimensions must be positive");
  const CategoryTable& cats = spec.categories;
  if (!cats.contains(spec.background_category) ||
      cats.is_thing(spec.background_category)) {
    throw Error("scene: background category must be a stuff class");
  }

  std::array<RgbImage::Plane, 3> planes;
  for (int k = 0; k < 3; ++k) {
    planes[k] = RgbImage::Plane::Constant(h, w, float(spec.background_color(k)));
  }
  LabelRaster semantic = LabelRaster::Constant(h, w, spec.background_category);
  for (const auto& s : spec.stuff) {
    if (!inside_image(s.box, w, h)) {
      throw Error("scene: stuff region exceeds the image bounds");
    }
    if (!cats.contains(s.category) || cats.is_thing(s.category)) {
      throw Error("scene: stuff region needs a stuff category");
    }
    const MaskArray where = rasterize(Shape::kRectangle, s.box, w, h);
    paint(planes, where, s.color);
    semantic = where.select(s.category, semantic);
  }

  // Visible segment per object, drawn back to front.
  LabelRaster ids = LabelRaster::Constant(h, w, kVoid);
  std::vector<MaskArray> masks;
  for (std::size_t k = 0; k < spec.objects.size(); ++k) {
    const auto& o = spec.objects[k];
    if (!inside_image(o.box, w, h)) {
      throw Error("scene: object " + std::to_string(k) +
                  " exceeds the image bounds");
    }
    if (!cats.is_thing(o.category)) {
      throw Error("scene: object " + std::to_string(k) +
                  " needs a thing category");
    }
    MaskArray where = rasterize(o.shape, o.box, w, h);
    if (!where.any()) {
      throw Error("scene: object " + std::to_string(k) + " covers no pixel");
    }
    paint(planes, where, o.color);
    semantic = where.select(o.category, semantic);
    ids = where.select(std::int32_t(k + 1), ids);
    masks.push_back(std::move(where));
  }

  if (spec.noise > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> jitter(-spec.noise, spec.noise);
    for (int c = 0; c < w; ++c) {
      for (int r = 0; r < h; ++r) {
        for (int k = 0; k < 3; ++k) {
          const float v = planes[k](r, c) + float(jitter(rng));
          planes[k](r, c) = std::clamp(v, 0.0f, 255.0f);
        }
      }
    }
  }

  // Dense ground-truth ids: visible objects first, then one per stuff class.
  std::map<std::int32_t, std::int32_t> category_of;
  std::map<std::int32_t, std::int32_t> remap;
  std::int32_t next = 1;
  for (std::size_t k = 0; k < masks.size(); ++k) {
    if (!(ids == std::int32_t(k + 1)).any()) continue;
    remap[std::int32_t(k + 1)] = next;
    category_of[next] = spec.objects[k].category;
    ++next;
  }
  std::map<std::int32_t, std::int32_t> stuff_id;
  for (Eigen::Index i = 0; i < ids.size(); ++i) {
    if (ids.data()[i] == kVoid) stuff_id.emplace(semantic.data()[i], 0);
  }
  for (auto& [cat, id] : stuff_id) {
    id = next++;
    category_of[id] = cat;
  }
  LabelRaster gt_ids(h, w);
  for (Eigen::Index i = 0; i < ids.size(); ++i) {
    const auto v = ids.data()[i];
    gt_ids.data()[i] =
        v == kVoid ? stuff_id.at(semantic.data()[i]) : remap.at(v);
  }

  std::vector<InstancePrediction> instances;
  std::vector<Relation> occlusions;
  for (std::size_t k = 0; k < masks.size(); ++k) {
    instances.push_back(make_instance(int(k), BinaryMask(masks[k]),
                                      spec.objects[k].score,
                                      spec.objects[k].category));
    for (std::size_t j = 0; j < k; ++j) {
      if ((masks[j] && masks[k]).any()) {
        occlusions.push_back({int(k), int(j)});
      }
    }
  }

  return SyntheticScene{
      RgbImage(std::move(planes[0]), std::move(planes[1]),
               std::move(planes[2])),
      std::move(instances),
      PanopticMap::from_raster(std::move(gt_ids), category_of, cats),
      SemanticMap(std::move(semantic), cats), std::move(occlusions)};
}

SceneSpec random_occlusion_spec(int objects, std::uint64_t seed, int width,
                                int height) {
  if (objects < 2 || objects > 3) {
    throw Error("random_occlusion_spec: 2 or 3 objects");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> side_w(width / 5, width / 2);
  std::uniform_int_distribution<int> side_h(height / 5, height / 2);
  std::uniform_real_distribution<double> score(0.65, 0.99);

  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.categories = synthetic_categories();
  spec.background_category = 2;
  spec.background_color = {128, 128, 128};

  for (int attempt = 0; attempt < 100000; ++attempt) {
    spec.objects.clear();
    std::vector<MaskArray> masks;
    for (int k = 0; k < objects; ++k) {
      const int bw = side_w(rng), bh = side_h(rng);
      std::uniform_int_distribution<int> px(0, width - bw), py(0, height - bh);
      const double x0 = px(rng), y0 = py(rng);
      ObjectSpec o;
      o.box = {x0, y0, x0 + bw, y0 + bh};
      o.category = 1;
      o.score = score(rng);
      spec.objects.push_back(o);
      masks.push_back(rasterize(Shape::kRectangle, o.box, width, height));
    }
    Eigen::ArrayXXi claims = Eigen::ArrayXXi::Zero(height, width);
    for (const auto& m : masks) claims += m.cast<int>();
    if ((claims >= 3).any()) continue;
    bool ok = true;
    int intersecting = 0;
    for (int i = 0; i < objects && ok; ++i) {
      for (int j = i + 1; j < objects && ok; ++j) {
        const auto inter = (masks[i] && masks[j]).count();
        if (inter == 0) continue;
        ++intersecting;
        const auto smaller = std::min(masks[i].count(), masks[j].count());
        ok = double(inter) > 0.25 * double(smaller);
      }
    }
    if (!ok || intersecting == 0) continue;
    for (int i = 0; i < objects && ok; ++i) {
      MaskArray covered = MaskArray::Constant(height, width, false);
      for (int j = i + 1; j < objects; ++j) covered = covered || masks[j];
      const auto visible = (masks[i] && !covered).count();
      ok = double(visible) > 0.6 * double(masks[i].count());
    }
    if (!ok) continue;

    for (auto& o : spec.objects) {
      do {
        o.color = random_color(rng);
      } while (std::any_of(spec.objects.begin(), spec.objects.end(),
                           [&](const ObjectSpec& other) {
                             return &other != &o &&
                                    other.color.norm() > 0.0 &&
                                    cosine(other.color, o.color) >= 0.9;
                           }));
    }
    return spec;
  }
  throw Error("random_occlusion_spec: no valid layout found");
}

SceneSpec random_clutter_spec(std::uint64_t seed, int width, int height) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(3, 6);
  std::uniform_int_distribution<int> side_w(width / 6, width / 2);
  std::uniform_int_distribution<int> side_h(height / 6, height / 2);
  std::uniform_real_distribution<double> score(0.61, 1.0);
  std::bernoulli_distribution ellipse(0.3);

  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.categories = synthetic_categories();
  spec.background_category = 3;
  spec.background_color = {90, 110, 70};
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    const int bw = side_w(rng), bh = side_h(rng);
    std::uniform_int_distribution<int> px(0, width - bw), py(0, height - bh);
    const double x0 = px(rng), y0 = py(rng);
    ObjectSpec o;
    o.shape = ellipse(rng) ? Shape::kEllipse : Shape::kRectangle;
    o.box = {x0, y0, x0 + bw, y0 + bh};
    o.color = random_color(rng);
    o.category = 1;
    o.score = score(rng);
    spec.objects.push_back(o);
  }
  spec.noise = 6;
  return spec;
}

}  // namespace pfuse

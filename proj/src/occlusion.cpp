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

#include "pfuse/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "pfuse/error.hpp"

namespace pfuse {

namespace {

void require_ratio(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(std::string(name) + " must lie in [0, 1], got " +
                std::to_string(v));
  }
}

void require_image_shape(const RgbImage& image, const BinaryMask& mask) {
  if (mask.width() != image.width() || mask.height() != image.height()) {
    throw Error("instance mask " + std::to_string(mask.width()) + "x" +
                std::to_string(mask.height()) + " does not match image " +
                std::to_string(image.width()) + "x" +
                std::to_string(image.height()));
  }
}

// Higher score first, then lower id.
bool score_order(const InstancePrediction& a, const InstancePrediction& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

double mean_cosine(const RgbImage& image, const MaskArray& pixels,
                   const Eigen::Vector3d& prototype) {
  double total = 0.0;
  std::int64_t n = 0;
  for (Eigen::Index c = 0; c < pixels.cols(); ++c) {
    for (Eigen::Index r = 0; r < pixels.rows(); ++r) {
      if (!pixels(r, c)) continue;
      total += rgb_cosine(image.pixel(int(r), int(c)), prototype);
      ++n;
    }
  }
  return total / double(n);
}

// Winner -> loser edges; acyclic by construction.
class RelationGraph {
 public:
  void add(int from, int to) { edges_.insert({from, to}); }

  bool reaches(int from, int to) const {
    std::vector<int> stack{from};
    std::set<int> seen{from};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      if (u == to) return true;
      for (auto it = edges_.lower_bound({u, INT32_MIN});
           it != edges_.end() && it->first == u; ++it) {
        if (seen.insert(it->second).second) stack.push_back(it->second);
      }
    }
    return false;
  }

 private:
  std::set<std::pair<int, int>> edges_;
};

struct Pass {
  LabelRaster owner;
  std::vector<Relation> relations;
  std::vector<Relation> set_aside;
  int pairs_resolved = 0;
};

Pass resolve_once(const RgbImage& image,
                  const std::vector<InstancePrediction>& insts,
                  const OcclusionConfig& config) {
  const int h = image.height(), w = image.width();
  Pass pass;
  pass.owner = LabelRaster::Constant(h, w, ResolvedScene::kNoOwner);
  if (insts.empty()) return pass;

  Eigen::ArrayXXi claims = Eigen::ArrayXXi::Zero(h, w);
  for (const auto& inst : insts) claims += inst.mask.bits().cast<int>();

  std::vector<Eigen::Vector3d> prototype(insts.size());
  for (std::size_t k = 0; k < insts.size(); ++k) {
    const MaskArray uncontested = insts[k].mask.bits() && (claims == 1);
    prototype[k] = uncontested.any()
                       ? mean_rgb(image, BinaryMask(uncontested))
                       : mean_rgb(image, insts[k].mask);
  }
  auto slot = [&](int id) {
    for (std::size_t k = 0; k < insts.size(); ++k) {
      if (insts[k].id == id) return k;
    }
    throw InvariantViolation("unknown instance id");
  };

  auto pairs = find_occluded_pairs(insts, config);
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const OccludedPair& x, const OccludedPair& y) {
                     if (x.pair_score != y.pair_score) {
                       return x.pair_score > y.pair_score;
                     }
                     return std::tie(x.a, x.b) < std::tie(y.a, y.b);
                   });

  MaskArray decided = MaskArray::Constant(h, w, false);
  RelationGraph graph;
  auto& owner = pass.owner;
  for (const auto& pair : pairs) {
    const auto& A = insts[slot(pair.a)];
    const auto& B = insts[slot(pair.b)];
    const double sim_a =
        mean_cosine(image, pair.overlap.bits(), prototype[slot(pair.a)]);
    const double sim_b =
        mean_cosine(image, pair.overlap.bits(), prototype[slot(pair.b)]);
    bool a_wins;
    if (sim_a != sim_b) {
      a_wins = sim_a > sim_b;
    } else {
      a_wins = score_order(A, B);
    }
    const int winner = a_wins ? A.id : B.id;
    const int loser = a_wins ? B.id : A.id;
    const auto& overlap = pair.overlap.bits();

    if (graph.reaches(loser, winner)) {
      // Contradicts earlier decisions: keep existing ownership and give any
      // still-open pixel to the instance the graph already puts in front.
      pass.set_aside.push_back({winner, loser});
      for (Eigen::Index i = 0; i < overlap.size(); ++i) {
        if (overlap.data()[i] && !decided.data()[i]) {
          owner.data()[i] = loser;
          decided.data()[i] = true;
        }
      }
      continue;
    }

    graph.add(winner, loser);
    pass.relations.push_back({winner, loser});
    ++pass.pairs_resolved;
    for (Eigen::Index i = 0; i < overlap.size(); ++i) {
      if (!overlap.data()[i]) continue;
      const auto current = owner.data()[i];
      if (!decided.data()[i] || current == loser) {
        owner.data()[i] = winner;
        decided.data()[i] = true;
      } else if (current != winner && graph.reaches(winner, current)) {
        owner.data()[i] = winner;
      }
    }
  }

  // Everything not settled by an occluded pair: score overwrite.
  std::vector<const InstancePrediction*> by_score;
  for (const auto& inst : insts) by_score.push_back(&inst);
  std::sort(by_score.begin(), by_score.end(),
            [](const auto* x, const auto* y) { return score_order(*x, *y); });
  for (const auto* inst : by_score) {
    owner = (inst->mask.bits() && owner == ResolvedScene::kNoOwner)
                .select(LabelRaster::Constant(h, w, inst->id), owner);
  }
  return pass;
}

}  // namespace

InstancePrediction make_instance(int id, BinaryMask mask, double score,
                                 std::int32_t category) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error("instance " + std::to_string(id) + ": score " +
                std::to_string(score) + " outside [0, 1]");
  }
  auto box = mask.bounding_box();
  if (!box) throw Error("instance " + std::to_string(id) + ": empty mask");
  return {id, std::move(mask), score, category, *box};
}

void validate(const OcclusionConfig& config) {
  require_ratio(config.score_floor, "score_floor");
  require_ratio(config.nms_iou, "nms_iou");
  require_ratio(config.overlap_ratio, "overlap_ratio");
  require_ratio(config.removal_ratio, "removal_ratio");
}

const InstancePrediction* ResolvedScene::instance(int id) const {
  for (const auto& inst : instances) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

BinaryMask ResolvedScene::owned_mask(int id) const {
  return BinaryMask(MaskArray(owner == id));
}

std::vector<InstancePrediction> filter_and_nms(
    std::span<const InstancePrediction> candidates,
    const OcclusionConfig& config) {
  validate(config);
  std::vector<const InstancePrediction*> order;
  for (const auto& c : candidates) {
    if (!candidates.empty()) require_same_shape(c.mask, candidates[0].mask);
    if (c.score > config.score_floor) order.push_back(&c);
  }
  std::sort(order.begin(), order.end(),
            [](const auto* x, const auto* y) { return score_order(*x, *y); });
  std::vector<InstancePrediction> kept;
  for (const auto* c : order) {
    const bool suppressed =
        std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
          return mask_iou(k.mask, c->mask) > config.nms_iou;
        });
    if (!suppressed) kept.push_back(*c);
  }
  return kept;
}

std::vector<OccludedPair> find_occluded_pairs(
    std::span<const InstancePrediction> instances,
    const OcclusionConfig& config) {
  std::vector<OccludedPair> pairs;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (std::size_t j = i + 1; j < instances.size(); ++j) {
      const auto& x = instances[i];
      const auto& y = instances[j];
      require_same_shape(x.mask, y.mask);
      MaskArray overlap = x.mask.bits() && y.mask.bits();
      const auto inter = overlap.count();
      if (inter == 0) continue;
      const bool occluded =
          double(inter) > config.overlap_ratio * double(x.mask.area()) ||
          double(inter) > config.overlap_ratio * double(y.mask.area());
      if (!occluded) continue;
      const bool x_first = x.id < y.id;
      pairs.push_back({x_first ? x.id : y.id, x_first ? y.id : x.id,
                       BinaryMask(std::move(overlap)),
                       std::max(x.score, y.score)});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& p, const auto& q) {
    return std::tie(p.a, p.b) < std::tie(q.a, q.b);
  });
  return pairs;
}

double rgb_cosine(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

Eigen::Vector3d mean_rgb(const RgbImage& image, const BinaryMask& region) {
  require_image_shape(image, region);
  const auto area = region.area();
  if (area == 0) throw Error("mean_rgb: empty region");
  const auto weight = region.bits().cast<double>();
  Eigen::Vector3d sum;
  for (int k = 0; k < 3; ++k) {
    sum(k) = (image.plane(k).cast<double>() * weight).sum();
  }
  return sum / double(area);
}

double appearance_similarity(const RgbImage& image, const BinaryMask& pixel_set,
                             const BinaryMask& instance_region) {
  require_image_shape(image, pixel_set);
  if (pixel_set.empty()) throw Error("appearance_similarity: empty pixel set");
  const Eigen::Vector3d prototype = mean_rgb(image, instance_region);
  return mean_cosine(image, pixel_set.bits(), prototype);
}

ResolvedScene resolve_scene(const RgbImage& image,
                            std::span<const InstancePrediction> instances,
                            const OcclusionConfig& config) {
  validate(config);
  std::vector<InstancePrediction> active(instances.begin(), instances.end());
  std::set<int> ids;
  for (const auto& inst : active) {
    require_image_shape(image, inst.mask);
    if (inst.mask.empty()) {
      throw Error("instance " + std::to_string(inst.id) + ": empty mask");
    }
    if (!ids.insert(inst.id).second) {
      throw Error("duplicate instance id " + std::to_string(inst.id));
    }
  }

  ResolvedScene scene;
  scene.width = image.width();
  scene.height = image.height();
  scene.instances.assign(instances.begin(), instances.end());

  Pass pass;
  while (true) {
    pass = resolve_once(image, active, config);
    // Retention of each active instance; remove the worst offender, if any.
    const InstancePrediction* worst = nullptr;
    double worst_retention = 0.0;
    for (const auto& inst : active) {
      const double kept_px = double((pass.owner == inst.id).count());
      const double retention = kept_px / double(inst.mask.area());
      if (retention > config.removal_ratio) continue;
      if (worst == nullptr || retention < worst_retention ||
          (retention == worst_retention && score_order(*worst, inst))) {
        worst = &inst;
        worst_retention = retention;
      }
    }
    if (worst == nullptr) break;
    scene.removed.push_back(worst->id);
    const int gone = worst->id;
    std::erase_if(active, [&](const auto& inst) { return inst.id == gone; });
  }

  scene.owner = std::move(pass.owner);
  scene.relations = std::move(pass.relations);
  scene.set_aside = std::move(pass.set_aside);
  scene.pairs_resolved = pass.pairs_resolved;
  for (const auto& inst : active) scene.kept.push_back(inst.id);
  std::sort(scene.kept.begin(), scene.kept.end());
  return scene;
}

}  // namespace pfuse

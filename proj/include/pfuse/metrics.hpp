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

#ifndef PFUSE_METRICS_HPP_
#define PFUSE_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pfuse/raster.hpp"

namespace pfuse {

struct SegmentMatch {
  std::int32_t pred_id = 0;
  std::int32_t gt_id = 0;
  std::int32_t category = 0;
  double iou = 0.0;
};

struct UnmatchedSegment {
  std::int32_t id = 0;
  std::int32_t category = 0;
};

struct MatchResult {
  std::vector<SegmentMatch> tp;
  std::vector<UnmatchedSegment> fp;
  std::vector<UnmatchedSegment> fn;
};

// Same-category pairs with IoU > 0.5 are true positives. Ground-truth void
// pixels are left out of the union, and predictions lying more than half in
// ground-truth void are dropped instead of counted as false positives.
MatchResult match_segments(const PanopticMap& pred, const PanopticMap& gt);

struct CategoryQuality {
  std::int32_t category = 0;
  bool is_thing = false;
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

// Category-averaged PQ / SQ / RQ over `count` categories.
struct Quality {
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  int count = 0;
};

struct PqReport {
  Quality all;
  Quality things;
  Quality stuff;
  std::vector<CategoryQuality> per_category;  // categories with any segment
  double miou_stuff = 0.0;
};

// Pools TP/FP/FN per category over all images, then averages PQ, SQ and RQ
// over the categories that have at least one predicted or ground-truth
// segment. miou_stuff is left at 0.
PqReport compute_pq(std::span<const MatchResult> matches,
                    const CategoryTable& categories);

// Pixel IoU per stuff category pooled over the image pairs, averaged over the
// stuff categories present in ground truth. Ground-truth void pixels are
// ignored. Returns 0 when no stuff category is present.
double compute_miou_stuff(
    std::span<const std::pair<LabelRaster, LabelRaster>> pred_gt,
    const CategoryTable& categories);
double compute_miou_stuff(const SemanticMap& pred, const SemanticMap& gt,
                          const CategoryTable& categories);

// Human-readable table in percent: PQ SQ RQ for all, things and stuff.
std::string format_report(const PqReport& report);
// Machine-readable JSON (fractions, not percent).
std::string report_json(const PqReport& report);

}  // namespace pfuse

#endif  // PFUSE_METRICS_HPP_

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

#include "pfuse/metrics.hpp"

#include <cstdio>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "pfuse/error.hpp"

namespace pfuse {

namespace {

struct Tally {
  double iou_sum = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

Quality average(const std::vector<CategoryQuality>& rows, int kind) {
  Quality q;
  for (const auto& r : rows) {
    if (kind == 1 && !r.is_thing) continue;
    if (kind == 2 && r.is_thing) continue;
    q.pq += r.pq;
    q.sq += r.sq;
    q.rq += r.rq;
    ++q.count;
  }
  if (q.count > 0) {
    q.pq /= q.count;
    q.sq /= q.count;
    q.rq /= q.count;
  }
  return q;
}

}  // namespace

MatchResult match_segments(const PanopticMap& pred, const PanopticMap& gt) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw Error("match_segments: prediction and ground truth differ in size");
  }
  if (!(pred.categories() == gt.categories())) {
    throw Error("match_segments: category tables differ");
  }
  std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> overlap;
  const auto& p_ids = pred.segment_ids();
  const auto& g_ids = gt.segment_ids();
  for (Eigen::Index i = 0; i < p_ids.size(); ++i) {
    ++overlap[{p_ids.data()[i], g_ids.data()[i]}];
  }
  std::map<std::int32_t, std::int64_t> pred_in_void;
  for (const auto& [key, count] : overlap) {
    if (key.first != kVoid && key.second == kVoid) {
      pred_in_void[key.first] = count;
    }
  }

  MatchResult result;
  std::set<std::int32_t> matched_pred, matched_gt;
  for (const auto& [key, inter] : overlap) {
    const auto [p, g] = key;
    if (p == kVoid || g == kVoid) continue;
    const Segment* ps = pred.find(p);
    const Segment* gs = gt.find(g);
    if (ps->category_id != gs->category_id) continue;
    const auto void_part = pred_in_void.count(p) ? pred_in_void.at(p) : 0;
    const double uni = double(ps->area + gs->area - inter - void_part);
    const double iou = double(inter) / uni;
    if (iou > 0.5) {
      result.tp.push_back({p, g, ps->category_id, iou});
      matched_pred.insert(p);
      matched_gt.insert(g);
    }
  }
  for (const auto& s : pred.segments()) {
    if (matched_pred.count(s.id)) continue;
    const auto void_part = pred_in_void.count(s.id) ? pred_in_void.at(s.id) : 0;
    if (double(void_part) / double(s.area) > 0.5) continue;
    result.fp.push_back({s.id, s.category_id});
  }
  for (const auto& s : gt.segments()) {
    if (!matched_gt.count(s.id)) result.fn.push_back({s.id, s.category_id});
  }
  return result;
}

PqReport compute_pq(std::span<const MatchResult> matches,
                    const CategoryTable& categories) {
  if (categories.empty()) throw Error("compute_pq: empty category set");
  if (matches.empty()) throw Error("compute_pq: no images");
  std::map<std::int32_t, Tally> tally;
  auto entry = [&](std::int32_t category) -> Tally& {
    if (!categories.contains(category)) {
      throw Error("compute_pq: unknown category " + std::to_string(category));
    }
    return tally[category];
  };
  for (const auto& m : matches) {
    for (const auto& t : m.tp) {
      auto& e = entry(t.category);
      e.iou_sum += t.iou;
      ++e.tp;
    }
    for (const auto& f : m.fp) ++entry(f.category).fp;
    for (const auto& f : m.fn) ++entry(f.category).fn;
  }

  PqReport report;
  for (const auto& [category, t] : tally) {
    if (t.tp + t.fp + t.fn == 0) continue;
    CategoryQuality q;
    q.category = category;
    q.is_thing = categories.is_thing(category);
    q.tp = t.tp;
    q.fp = t.fp;
    q.fn = t.fn;
    const double denom = double(t.tp) + 0.5 * double(t.fp) + 0.5 * double(t.fn);
    q.sq = t.tp > 0 ? t.iou_sum / double(t.tp) : 0.0;
    q.rq = double(t.tp) / denom;
    q.pq = t.iou_sum / denom;
    report.per_category.push_back(q);
  }
  report.all = average(report.per_category, 0);
  report.things = average(report.per_category, 1);
  report.stuff = average(report.per_category, 2);
  return report;
}

double compute_miou_stuff(
    std::span<const std::pair<LabelRaster, LabelRaster>> pred_gt,
    const CategoryTable& categories) {
  std::map<std::int32_t, std::pair<std::int64_t, std::int64_t>> counts;
  std::set<std::int32_t> present;
  for (const auto& [pred, gt] : pred_gt) {
    if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
      throw Error("compute_miou_stuff: dimension mismatch");
    }
    for (Eigen::Index i = 0; i < gt.size(); ++i) {
      const auto g = gt.data()[i];
      if (g == kVoid) continue;
      const auto p = pred.data()[i];
      const bool g_stuff = categories.contains(g) && !categories.is_thing(g);
      const bool p_stuff = categories.contains(p) && !categories.is_thing(p);
      if (g_stuff) present.insert(g);
      if (p == g) {
        if (g_stuff) {
          ++counts[g].first;
          ++counts[g].second;
        }
      } else {
        if (g_stuff) ++counts[g].second;
        if (p_stuff) ++counts[p].second;
      }
    }
  }
  if (present.empty()) return 0.0;
  double total = 0.0;
  for (auto c : present) {
    const auto [inter, uni] = counts[c];
    total += double(inter) / double(uni);
  }
  return total / double(present.size());
}

double compute_miou_stuff(const SemanticMap& pred, const SemanticMap& gt,
                          const CategoryTable& categories) {
  const std::pair<LabelRaster, LabelRaster> one{pred.labels(), gt.labels()};
  return compute_miou_stuff(std::span(&one, 1), categories);
}

std::string format_report(const PqReport& r) {
  auto pct = [](double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%6.1f", 100.0 * v);
    return std::string(buf);
  };
  std::string out;
  out += "          PQ     SQ     RQ    N\n";
  auto row = [&](const char* name, const Quality& q) {
    char n[16];
    std::snprintf(n, sizeof n, "%5d", q.count);
    out += std::string(name) + pct(q.pq) + " " + pct(q.sq) + " " + pct(q.rq) +
           n + "\n";
  };
  row("All   ", r.all);
  row("Things", r.things);
  row("Stuff ", r.stuff);
  out += "mIoU(stuff) " + pct(r.miou_stuff) + "\n";
  return out;
}

std::string report_json(const PqReport& r) {
  nlohmann::ordered_json j;
  auto quality = [](const Quality& q) {
    nlohmann::ordered_json o;
    o["pq"] = q.pq;
    o["sq"] = q.sq;
    o["rq"] = q.rq;
    o["n"] = q.count;
    return o;
  };
  j["all"] = quality(r.all);
  j["things"] = quality(r.things);
  j["stuff"] = quality(r.stuff);
  j["miou_stuff"] = r.miou_stuff;
  auto& rows = j["per_category"] = nlohmann::ordered_json::array();
  for (const auto& c : r.per_category) {
    nlohmann::ordered_json o;
    o["category_id"] = c.category;
    o["isthing"] = c.is_thing ? 1 : 0;
    o["pq"] = c.pq;
    o["sq"] = c.sq;
    o["rq"] = c.rq;
    o["tp"] = c.tp;
    o["fp"] = c.fp;
    o["fn"] = c.fn;
    rows.push_back(o);
  }
  return j.dump(2) + "\n";
}

}  // namespace pfuse

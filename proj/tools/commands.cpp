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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "pfuse/bench.hpp"
#include "pfuse/error.hpp"
#include "pfuse/metrics.hpp"
#include "pfuse/panoptic_io.hpp"
#include "pfuse/png.hpp"
#include "pfuse/roi.hpp"
#include "pfuse/synthetic.hpp"

namespace pfuse::cli {

namespace fs = std::filesystem;

namespace {

// Applies fn to 0..n-1 on up to `jobs` threads. Results and the first error
// (by index) are independent of scheduling.
template <typename Fn>
auto parallel_map(std::size_t n, int jobs, Fn fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<std::optional<R>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, int(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

void require_set(const fs::path& p, const char* flag) {
  if (p.empty()) throw Error(std::string("missing required flag ") + flag);
}

PngImage to_rgb_png(const FeatureMap<float>& map) {
  PngImage png;
  png.width = map.width();
  png.height = map.height();
  png.channels = 3;
  png.samples.resize(std::size_t(png.width) * png.height * 3);
  for (int r = 0; r < png.height; ++r) {
    for (int c = 0; c < png.width; ++c) {
      for (int k = 0; k < 3; ++k) {
        const float v = map.pixel(r, c)(k);
        png.samples[(std::size_t(r) * png.width + c) * 3 + k] =
            std::uint16_t(std::lround(std::clamp(v, 0.0f, 255.0f)));
      }
    }
  }
  return png;
}

struct FusedImage {
  PanopticRecord record;
  std::string summary;
};

}  // namespace

void validate(const RunConfig& config) {
  pfuse::validate(config.occlusion);
  if (config.fusion.stuff_area_floor < 0) {
    throw Error("--stuff-area-floor must be >= 0");
  }
  if (config.jobs < 1) throw Error("--jobs must be >= 1");
}

void cmd_fuse(const RunConfig& config, std::ostream& out, std::ostream& log) {
  validate(config);
  require_set(config.instances, "--instances");
  require_set(config.images, "--images");
  require_set(config.semantic, "--semantic");
  require_set(config.out, "--out");
  const InstanceManifest manifest = read_instances(config.instances);
  log << "fuse: " << manifest.images.size() << " image(s), " << config.jobs
      << " job(s)\n";

  auto fused = parallel_map(manifest.images.size(), config.jobs,
                            [&](std::size_t i) {
    const ManifestImage& img = manifest.images[i];
    const fs::path rgb_path = config.images / img.file_name;
    const RgbImage rgb = read_rgb(rgb_path);
    if (rgb.width() != img.width || rgb.height() != img.height) {
      throw Error(rgb_path.string() + ": size differs from the manifest");
    }
    const fs::path sem_path = config.semantic / img.file_name;
    const SemanticMap semantic = read_semantic(sem_path, manifest.categories);
    if (semantic.width() != img.width || semantic.height() != img.height) {
      throw Error(sem_path.string() + ": size differs from the manifest");
    }
    const auto survivors = filter_and_nms(img.instances, config.occlusion);
    const ResolvedScene scene = resolve_scene(rgb, survivors, config.occlusion);
    PanopticMap map = fuse(scene, semantic, config.fusion);

    std::ostringstream line;
    line << "image " << img.id << " " << img.file_name << ": candidates "
         << img.instances.size() << " after_nms " << survivors.size()
         << " kept " << scene.kept.size() << " removed "
         << scene.removed.size() << " pairs_resolved " << scene.pairs_resolved
         << " set_aside " << scene.set_aside.size() << " segments "
         << map.segments().size();
    fs::path png_name = fs::path(img.file_name).filename();
    png_name.replace_extension(".png");
    return FusedImage{
        PanopticRecord{img.id, img.file_name, png_name.string(), std::move(map)},
        line.str()};
  });

  PanopticDataset dataset{manifest.categories, {}};
  for (auto& f : fused) {
    out << f.summary << "\n";
    dataset.records.push_back(std::move(f.record));
  }
  fs::create_directories(config.out);
  write_panoptic(config.out / "panoptic.json", dataset);
  log << "fuse: wrote " << (config.out / "panoptic.json").string() << "\n";
}

void cmd_evaluate(const RunConfig& config, std::ostream& out,
                  std::ostream& log) {
  require_set(config.gt, "--gt");
  require_set(config.pred, "--pred");
  const PanopticDataset gt = read_panoptic(config.gt);
  const PanopticDataset pred = read_panoptic(config.pred);
  if (!(gt.categories == pred.categories)) {
    throw Error("prediction and ground truth use different category tables");
  }
  std::map<std::int64_t, const PanopticRecord*> by_id;
  for (const auto& r : pred.records) by_id[r.image_id] = &r;
  if (by_id.size() != gt.records.size()) {
    throw Error("prediction and ground truth cover different images");
  }
  std::vector<MatchResult> matches;
  std::vector<std::pair<LabelRaster, LabelRaster>> semantic;
  for (const auto& g : gt.records) {
    auto it = by_id.find(g.image_id);
    if (it == by_id.end()) {
      throw Error("no prediction for image " + std::to_string(g.image_id));
    }
    matches.push_back(match_segments(it->second->map, g.map));
    semantic.emplace_back(it->second->map.category_raster(),
                          g.map.category_raster());
  }
  log << "evaluate: " << matches.size() << " image(s)\n";
  PqReport report = compute_pq(matches, gt.categories);
  report.miou_stuff = compute_miou_stuff(semantic, gt.categories);
  out << format_report(report);
  if (!config.out.empty()) {
    fs::create_directories(config.out);
    const std::string text = report_json(report);
    write_file(config.out / "pq_report.json",
               std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                         text.size()));
  }
}

void cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& log) {
  const auto grid =
      config.grid.empty() ? appendix_grid() : parse_grid(config.grid);
  BenchOptions opt;
  opt.channels = config.channels;
  opt.repetitions = config.repetitions;
  opt.patch_size = config.patch_size;
  opt.seed = config.seed;
  log << "bench: " << grid.size() << " configuration(s), " << opt.channels
      << " channels, " << opt.repetitions << " repetition(s)\n";
  const auto records = bench_kernels(grid, opt);
  const std::string text = format_report(records);
  out << text;
  if (!config.out.empty()) {
    fs::create_directories(config.out);
    write_file(config.out / "bench.jsonl",
               std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                         text.size()));
  }
}

void cmd_kernel_demo(const RunConfig& config, std::ostream& out,
                     std::ostream& log) {
  require_set(config.images, "--images");
  require_set(config.out, "--out");
  if (!config.box) throw Error("missing required flag --box");
  const RgbImage rgb = read_rgb(config.images);
  const int w = rgb.width(), h = rgb.height();
  const SamplingGrid grid = make_grid(*config.box, config.m, w, h);

  FeatureMap<float> src(w, h, 3);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int k = 0; k < 3; ++k) src.pixel(r, c)(k) = rgb.plane(k)(r, c);
    }
  }
  const auto patch = roi_align(src, grid);
  Accumulator<double> inlay(w, h, 3), upsample(w, h, 3), avg(w, h, 3);
  roi_inlay(patch, inlay);
  roi_upsample(patch, upsample);
  avg_roi_upsample(patch, avg);

  const MaskArray holes = hole_mask(upsample, grid.box);
  PngImage hole_png;
  hole_png.width = w;
  hole_png.height = h;
  hole_png.channels = 1;
  hole_png.samples.resize(std::size_t(w) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      hole_png.samples[std::size_t(r) * w + c] = holes(r, c) ? 255 : 0;
    }
  }

  fs::create_directories(config.out);
  write_png(config.out / "roi_inlay.png", to_rgb_png(inlay_finalize(inlay)));
  write_png(config.out / "roi_upsample.png",
            to_rgb_png(sum_finalize(upsample)));
  write_png(config.out / "avg_roi_upsample.png",
            to_rgb_png(inlay_finalize(avg)));
  write_png(config.out / "holes.png", hole_png);
  out << "bin " << grid.bin_w << "x" << grid.bin_h << " holes_inlay "
      << hole_count(inlay, grid.box) << " holes_upsample "
      << hole_count(upsample, grid.box) << " holes_avg_upsample "
      << hole_count(avg, grid.box) << "\n";
  log << "kernel-demo: wrote 4 PNGs to " << config.out.string() << "\n";
}

void cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& log) {
  require_set(config.out, "--out");
  const CategoryTable cats = synthetic_categories();
  std::vector<SceneSpec> specs;

  // Red object in front of a blue one, over a wall/floor background.
  SceneSpec front;
  front.width = 128;
  front.height = 96;
  front.categories = cats;
  front.background_category = 2;
  front.background_color = {200, 200, 190};
  front.stuff.push_back({{0, 48, 128, 96}, 3, {120, 90, 60}});
  front.objects.push_back(
      {Shape::kRectangle, {20, 20, 70, 80}, {40, 60, 220}, 1, 0.95});
  front.objects.push_back(
      {Shape::kEllipse, {50, 30, 100, 70}, {220, 40, 30}, 1, 0.70});
  specs.push_back(front);

  // Stuff floor: a 63x65 patch (4095 px) and a 64x64 patch (4096 px).
  SceneSpec floor;
  floor.width = 160;
  floor.height = 96;
  floor.categories = cats;
  floor.background_category = 2;
  floor.background_color = {180, 180, 180};
  floor.stuff.push_back({{0, 0, 63, 65}, 4, {30, 160, 30}});
  floor.stuff.push_back({{80, 0, 144, 64}, 3, {100, 70, 40}});
  floor.objects.push_back(
      {Shape::kRectangle, {100, 70, 130, 92}, {200, 30, 200}, 1, 0.9});
  specs.push_back(floor);

  for (int k = 0; k < 3; ++k) {
    specs.push_back(random_clutter_spec(config.seed + 100 + k, 96, 80));
  }

  const fs::path root = config.out;
  fs::create_directories(root / "images");
  fs::create_directories(root / "semantic");
  InstanceManifest manifest{cats, {}};
  PanopticDataset gt{cats, {}};
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const SyntheticScene scene =
        generate_synthetic_scene(specs[i], config.seed + i);
    const std::string name = "scene_" + std::to_string(i) + ".png";
    write_rgb(root / "images" / name, scene.image);
    write_semantic(root / "semantic" / name, scene.semantic);
    ManifestImage entry{std::int64_t(i + 1), name, specs[i].width,
                        specs[i].height, scene.instances};
    // A near-duplicate (removed by NMS) and a low-score candidate.
    if (!scene.instances.empty()) {
      const auto& first = scene.instances.front();
      const int n = int(entry.instances.size());
      entry.instances.push_back(make_instance(
          n, first.mask, std::max(0.0, first.score - 0.05), first.category));
      entry.instances.push_back(
          make_instance(n + 1, first.mask, 0.4, first.category));
    }
    manifest.images.push_back(std::move(entry));
    gt.records.push_back({std::int64_t(i + 1), name, name, scene.ground_truth});
  }
  write_instances(root / "instances.json", manifest);
  write_panoptic(root / "gt.json", gt);
  out << "wrote " << specs.size() << " scene(s) to " << root.string() << "\n";
  log << "synth: seed " << config.seed << "\n";
}

int run_command(const std::function<void()>& command, std::ostream& log) {
  try {
    command();
    return kOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvariantViolation& e) {
    log << "internal error: " << e.what() << "\n";
    return kInternalError;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace pfuse::cli

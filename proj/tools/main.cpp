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

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "pfuse/error.hpp"

namespace {

std::optional<pfuse::Box> parse_box(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 4) throw pfuse::Error("--box expects x0,y0,x1,y1");
  return pfuse::Box{v[0], v[1], v[2], v[3]};
}

void add_thresholds(CLI::App* cmd, pfuse::cli::RunConfig& cfg) {
  cmd->add_option("--score-floor", cfg.occlusion.score_floor,
                  "Drop candidates scoring at or below this before NMS")
      ->capture_default_str();
  cmd->add_option("--nms-iou", cfg.occlusion.nms_iou,
                  "Class-agnostic mask NMS threshold")
      ->capture_default_str();
  cmd->add_option("--overlap-ratio", cfg.occlusion.overlap_ratio,
                  "Overlap fraction of either instance that makes an "
                  "occluded pair")
      ->capture_default_str();
  cmd->add_option("--removal-ratio", cfg.occlusion.removal_ratio,
                  "Remove an instance keeping no more than this fraction of "
                  "its area")
      ->capture_default_str();
  cmd->add_option("--stuff-area-floor", cfg.fusion.stuff_area_floor,
                  "Stuff segments with fewer pixels become void")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pfuse: learning-free panoptic fusion, evaluation and RoI "
               "restoration kernels"};
  app.require_subcommand(1);
  pfuse::cli::RunConfig cfg;
  std::string box_text;

  auto* fuse = app.add_subcommand(
      "fuse", "Resolve occlusions and fuse instances with semantic maps");
  fuse->add_option("--instances", cfg.instances, "Instance manifest JSON")
      ->required();
  fuse->add_option("--images", cfg.images, "Directory of RGB PNGs")->required();
  fuse->add_option("--semantic", cfg.semantic,
                   "Directory of semantic PNGs (same file names)")
      ->required();
  fuse->add_option("--out", cfg.out, "Output directory")->required();
  fuse->add_option("--jobs", cfg.jobs, "Images processed in parallel")
      ->capture_default_str();
  add_thresholds(fuse, cfg);

  auto* evaluate =
      app.add_subcommand("evaluate", "PQ / SQ / RQ and stuff mIoU");
  evaluate->add_option("--gt", cfg.gt, "Ground-truth panoptic JSON")
      ->required();
  evaluate->add_option("--pred", cfg.pred, "Predicted panoptic JSON")
      ->required();
  evaluate->add_option("--out", cfg.out,
                       "Directory for pq_report.json (optional)");

  auto* bench =
      app.add_subcommand("bench", "Time roi_inlay against roi_upsample");
  bench->add_option("--grid", cfg.grid,
                    "OBJECTSxSIZExOUTPUT list, comma separated (default: the "
                    "five reference rows)");
  bench->add_option("--channels", cfg.channels)->capture_default_str();
  bench->add_option("--repetitions", cfg.repetitions)->capture_default_str();
  bench->add_option("--patch-size", cfg.patch_size,
                    "Patch side fed to both kernels; 0 = object size")
      ->capture_default_str();
  bench->add_option("--seed", cfg.seed)->capture_default_str();
  bench->add_option("--out", cfg.out, "Directory for bench.jsonl (optional)");

  auto* demo = app.add_subcommand(
      "kernel-demo", "Crop an RGB region and restore it with each kernel");
  demo->add_option("--images", cfg.images, "Input RGB PNG")->required();
  demo->add_option("--box", box_text, "x0,y0,x1,y1")->required();
  demo->add_option("--m", cfg.m, "Sampling points per side")
      ->capture_default_str();
  demo->add_option("--out", cfg.out, "Output directory")->required();

  auto* synth =
      app.add_subcommand("synth", "Write the synthetic fixture corpus");
  synth->add_option("--out", cfg.out, "Output directory")->required();
  synth->add_option("--seed", cfg.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pfuse::cli::kInputError;
  }

  using namespace pfuse::cli;
  return run_command(
      [&] {
        if (!box_text.empty()) cfg.box = parse_box(box_text);
        if (fuse->parsed()) cmd_fuse(cfg, std::cout, std::cerr);
        if (evaluate->parsed()) cmd_evaluate(cfg, std::cout, std::cerr);
        if (bench->parsed()) cmd_bench(cfg, std::cout, std::cerr);
        if (demo->parsed()) cmd_kernel_demo(cfg, std::cout, std::cerr);
        if (synth->parsed()) cmd_synth(cfg, std::cout, std::cerr);
      },
      std::cerr);
}

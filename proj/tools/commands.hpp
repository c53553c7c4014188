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

#ifndef PFUSE_TOOLS_COMMANDS_HPP_
#define PFUSE_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "pfuse/fusion.hpp"
#include "pfuse/mask.hpp"
#include "pfuse/occlusion.hpp"

namespace pfuse::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kInternalError = 2 };

struct RunConfig {
  std::filesystem::path instances;  // instance manifest JSON
  std::filesystem::path semantic;   // directory of semantic PNGs
  std::filesystem::path images;     // RGB directory (fuse) or file (demo)
  std::filesystem::path gt;         // ground-truth panoptic JSON
  std::filesystem::path pred;       // predicted panoptic JSON
  std::filesystem::path out;        // output directory
  OcclusionConfig occlusion;
  FusionConfig fusion;
  int jobs = 1;
  std::uint64_t seed = 0;
  // bench
  std::string grid;  // empty: the five reference rows
  int channels = 512;
  int repetitions = 5;
  int patch_size = 0;
  // kernel-demo
  std::optional<Box> box;
  int m = 28;
};

// Throws pfuse::Error when a ratio leaves [0, 1] or a count is invalid.
void validate(const RunConfig& config);

// Each command writes data to `out` (and files under config.out) and
// diagnostics to `log`; errors propagate as exceptions.
void cmd_fuse(const RunConfig& config, std::ostream& out, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& out,
                  std::ostream& log);
void cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& log);
void cmd_kernel_demo(const RunConfig& config, std::ostream& out,
                     std::ostream& log);
// Writes the synthetic fixture corpus (images, semantic maps, instance
// manifest, ground truth) under config.out.
void cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& log);

// Runs a command and maps the outcome to an exit status: 0 success, 1 input
// error, 2 internal invariant violation.
int run_command(const std::function<void()>& command, std::ostream& log);

}  // namespace pfuse::cli

#endif  // PFUSE_TOOLS_COMMANDS_HPP_

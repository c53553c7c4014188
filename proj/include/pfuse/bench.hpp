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

#ifndef PFUSE_BENCH_HPP_
#define PFUSE_BENCH_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pfuse {

struct BenchConfig {
  int objects = 0;
  int object_size = 0;
  int output_size = 0;

  friend bool operator==(const BenchConfig&, const BenchConfig&) = default;
};

struct BenchOptions {
  int channels = 512;
  int repetitions = 5;
  // Side of the cropped patch fed to both kernels; 0 uses the object size.
  int patch_size = 0;
  std::uint64_t seed = 0;
};

struct BenchRecord {
  BenchConfig config;
  double inlay_ns = 0.0;     // median wall time of one full pass
  double upsample_ns = 0.0;
  double speedup = 0.0;      // upsample_ns / inlay_ns
};

// The five (objects, object size, output size) rows of the reference speed
// table: 50/28/300, 100/28/300, 100/28/800, 100/56/300, 100/128/300.
std::vector<BenchConfig> appendix_grid();

// Parses "50x28x300,100x28x300" (objects x object size x output size).
std::vector<BenchConfig> parse_grid(const std::string& text);

// Times roi_inlay against roi_upsample on a deterministic workload: for each
// configuration, `objects` random patches are restored into one
// output_size x output_size canvas with `channels` channels. Configurations
// with zero objects are skipped. Single-threaded.
std::vector<BenchRecord> bench_kernels(std::span<const BenchConfig> configs,
                                       const BenchOptions& options);

std::vector<BenchRecord> bench_kernels(std::span<const int> object_sizes,
                                       int output_size, int channels,
                                       int object_count, int repetitions);

// One JSON object per line.
std::string format_report(std::span<const BenchRecord> records);

}  // namespace pfuse

#endif  // PFUSE_BENCH_HPP_

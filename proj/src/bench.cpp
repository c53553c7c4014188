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

#include "pfuse/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pfuse/error.hpp"
#include "pfuse/roi.hpp"

namespace pfuse {

namespace {

constexpr int kPatchPool = 4;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <typename Fn>
double time_ns(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::nano>(t1 - t0).count();
}

BenchRecord run_one(const BenchConfig& cfg, const BenchOptions& opt) {
  const int m = opt.patch_size > 0 ? opt.patch_size : cfg.object_size;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<float> value(0.0f, 1.0f);
  std::uniform_int_distribution<int> offset(0,
                                            cfg.output_size - cfg.object_size);

  // Objects cycle through a small pool of patch values; each keeps its own
  // position so the canvas traffic is that of `objects` distinct regions.
  std::vector<FeatureRows<float>> pool;
  const int pool_size = std::min(cfg.objects, kPatchPool);
  for (int k = 0; k < pool_size; ++k) {
    FeatureRows<float> v(std::int64_t(m) * m, opt.channels);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = value(rng);
    pool.push_back(std::move(v));
  }
  std::vector<SamplingGrid> grids;
  for (int k = 0; k < cfg.objects; ++k) {
    const double x0 = offset(rng), y0 = offset(rng);
    grids.push_back(make_grid(
        {x0, y0, x0 + cfg.object_size, y0 + cfg.object_size}, m));
  }

  Accumulator<float> canvas(cfg.output_size, cfg.output_size, opt.channels);
  auto inlay_pass = [&] {
    for (int k = 0; k < cfg.objects; ++k) {
      roi_inlay(grids[k], pool[k % pool_size], canvas);
    }
  };
  auto upsample_pass = [&] {
    for (int k = 0; k < cfg.objects; ++k) {
      roi_upsample(grids[k], pool[k % pool_size], canvas);
    }
  };

  // One untimed warm-up pass each, then alternate to spread drift evenly.
  canvas.clear();
  inlay_pass();
  canvas.clear();
  upsample_pass();
  std::vector<double> inlay, upsample;
  for (int rep = 0; rep < opt.repetitions; ++rep) {
    canvas.clear();
    inlay.push_back(time_ns(inlay_pass));
    canvas.clear();
    upsample.push_back(time_ns(upsample_pass));
  }
  BenchRecord rec{cfg, median(inlay), median(upsample), 0.0};
  rec.speedup = rec.inlay_ns > 0.0 ? rec.upsample_ns / rec.inlay_ns : 0.0;
  return rec;
}

}  // namespace

std::vector<BenchConfig> appendix_grid() {
  return {{50, 28, 300}, {100, 28, 300}, {100, 28, 800}, {100, 56, 300},
          {100, 128, 300}};
}

std::vector<BenchConfig> parse_grid(const std::string& text) {
  std::vector<BenchConfig> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    BenchConfig cfg;
    char x1 = 0, x2 = 0;
    std::istringstream is(item);
    if (!(is >> cfg.objects >> x1 >> cfg.object_size >> x2 >>
          cfg.output_size) ||
        x1 != 'x' || x2 != 'x' || !is.eof()) {
      throw Error("bad grid entry '" + item +
                  "', expected OBJECTSxSIZExOUTPUT");
    }
    out.push_back(cfg);
  }
  return out;
}

std::vector<BenchRecord> bench_kernels(std::span<const BenchConfig> configs,
                                       const BenchOptions& options) {
  if (options.channels < 1 || options.repetitions < 1 ||
      options.patch_size < 0) {
    throw Error("bench: channels and repetitions must be >= 1");
  }
  std::vector<BenchRecord> out;
  for (const auto& cfg : configs) {
    if (cfg.objects < 0 || cfg.object_size < 1 || cfg.output_size < 1) {
      throw Error("bench: sizes must be >= 1");
    }
    if (cfg.object_size > cfg.output_size) {
      throw Error("bench: object size exceeds output size");
    }
    if (cfg.objects == 0) continue;
    out.push_back(run_one(cfg, options));
  }
  return out;
}

std::vector<BenchRecord> bench_kernels(std::span<const int> object_sizes,
                                       int output_size, int channels,
                                       int object_count, int repetitions) {
  std::vector<BenchConfig> configs;
  for (int size : object_sizes) {
    configs.push_back({object_count, size, output_size});
  }
  BenchOptions opt;
  opt.channels = channels;
  opt.repetitions = repetitions;
  return bench_kernels(configs, opt);
}

std::string format_report(std::span<const BenchRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["objects"] = r.config.objects;
    j["object_size"] = r.config.object_size;
    j["output_size"] = r.config.output_size;
    j["inlay_ns"] = r.inlay_ns;
    j["upsample_ns"] = r.upsample_ns;
    j["speedup"] = r.speedup;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace pfuse

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

#ifndef PFUSE_PNG_HPP_
#define PFUSE_PNG_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pfuse {

// Decoded PNG: row-major interleaved samples. Palette and low-bit-depth gray
// images are expanded to 8 bits; alpha is dropped.
struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;   // 1 (gray) or 3 (RGB)
  int bit_depth = 8;  // 8 or 16
  std::vector<std::uint16_t> samples;

  std::uint16_t at(int row, int col, int channel = 0) const {
    return samples[(std::size_t(row) * width + col) * channels + channel];
  }
};

PngImage decode_png(std::span<const std::uint8_t> bytes);
PngImage read_png(const std::filesystem::path& path);

// Non-interlaced, fixed compression settings and no timestamp, so equal
// images always encode to equal bytes.
std::vector<std::uint8_t> encode_png(const PngImage& image);
void write_png(const std::filesystem::path& path, const PngImage& image);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

}  // namespace pfuse

#endif  // PFUSE_PNG_HPP_

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

#ifndef PFUSE_PANOPTIC_IO_HPP_
#define PFUSE_PANOPTIC_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pfuse/occlusion.hpp"
#include "pfuse/png.hpp"
#include "pfuse/raster.hpp"

namespace pfuse {

// ---- COCO panoptic ---------------------------------------------------------

struct PanopticRecord {
  std::int64_t image_id = 0;
  std::string image_file;  // name of the source image ("images" entry)
  std::string png_file;    // id-map PNG, relative to the PNG directory
  PanopticMap map;
};

struct PanopticDataset {
  CategoryTable categories;
  std::vector<PanopticRecord> records;
};

// Segment id <-> RGB: id = R + 256 * G + 256^2 * B.
PngImage encode_id_map(const LabelRaster& ids);
LabelRaster decode_id_map(const PngImage& png);

// JSON document only (sorted keys, two-space indent, trailing newline).
std::string panoptic_json(const PanopticDataset& dataset);

// PNG directory convention: `foo.json` pairs with directory `foo/`.
std::filesystem::path png_dir_for(const std::filesystem::path& json_path);

// Writes the JSON file and one id-map PNG per record.
void write_panoptic(const std::filesystem::path& json_path,
                    const PanopticDataset& dataset);

// Strict reader: rejects id/table disagreements, area or bbox mismatches and
// PNGs whose size differs from the image entry.
PanopticDataset read_panoptic(const std::filesystem::path& json_path);

// ---- instance manifest -----------------------------------------------------

struct ManifestImage {
  std::int64_t id = 0;
  std::string file_name;  // RGB image, relative to the image directory
  int width = 0;
  int height = 0;
  std::vector<InstancePrediction> instances;
};

struct InstanceManifest {
  CategoryTable categories;
  std::vector<ManifestImage> images;
};

// Mask PNG paths inside the manifest resolve against its directory.
InstanceManifest read_instances(const std::filesystem::path& manifest_path);
// Writes every mask inline as uncompressed RLE.
void write_instances(const std::filesystem::path& manifest_path,
                     const InstanceManifest& manifest);

// ---- plain rasters ---------------------------------------------------------

RgbImage read_rgb(const std::filesystem::path& path);
void write_rgb(const std::filesystem::path& path, const RgbImage& image);

// Single-channel 8- or 16-bit PNG of category ids.
SemanticMap read_semantic(const std::filesystem::path& path,
                          const CategoryTable& categories);
void write_semantic(const std::filesystem::path& path, const SemanticMap& map);

// 8-bit mask PNG; nonzero pixels are set.
BinaryMask read_mask_png(const std::filesystem::path& path);

}  // namespace pfuse

#endif  // PFUSE_PANOPTIC_IO_HPP_

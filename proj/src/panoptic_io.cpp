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

#include "pfuse/panoptic_io.hpp"

#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "pfuse/error.hpp"

namespace pfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parse_json_file(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(where + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(where + ": field '" + key + "' has the wrong type");
  }
}

json categories_to_json(const CategoryTable& table) {
  json out = json::array();
  for (const auto& c : table.all()) {
    out.push_back({{"id", c.id}, {"name", c.name}, {"isthing", c.is_thing ? 1 : 0}});
  }
  return out;
}

CategoryTable categories_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw Error(where + ": 'categories' must be an array");
  std::vector<Category> out;
  for (const auto& c : arr) {
    Category cat;
    cat.id = field<std::int32_t>(c, "id", where);
    cat.name = c.contains("name") ? field<std::string>(c, "name", where) : "";
    const auto& thing = c.contains("isthing") ? c.at("isthing") : json(false);
    cat.is_thing = thing.is_boolean() ? thing.get<bool>()
                                      : thing.is_number() && thing.get<int>() != 0;
    out.push_back(std::move(cat));
  }
  return CategoryTable(std::move(out));
}

std::array<std::int64_t, 4> segment_bbox(const LabelRaster& ids,
                                         std::int32_t id) {
  const auto box = BinaryMask(MaskArray(ids == id)).bounding_box();
  return {std::int64_t(box->x0), std::int64_t(box->y0),
          std::int64_t(box->width()), std::int64_t(box->height())};
}

}  // namespace

PngImage encode_id_map(const LabelRaster& ids) {
  PngImage png;
  png.width = static_cast<int>(ids.cols());
  png.height = static_cast<int>(ids.rows());
  png.channels = 3;
  png.bit_depth = 8;
  png.samples.resize(std::size_t(png.width) * png.height * 3);
  for (int r = 0; r < png.height; ++r) {
    for (int c = 0; c < png.width; ++c) {
      const std::int32_t id = ids(r, c);
      if (id < 0 || id >= (1 << 24)) {
        throw Error("segment id " + std::to_string(id) +
                    " does not fit in an RGB id map");
      }
      const std::size_t base = (std::size_t(r) * png.width + c) * 3;
      png.samples[base] = id & 0xff;
      png.samples[base + 1] = (id >> 8) & 0xff;
      png.samples[base + 2] = (id >> 16) & 0xff;
    }
  }
  return png;
}

LabelRaster decode_id_map(const PngImage& png) {
  if (png.channels != 3 || png.bit_depth != 8) {
    throw Error("panoptic id map must be an 8-bit RGB PNG");
  }
  LabelRaster ids(png.height, png.width);
  for (int r = 0; r < png.height; ++r) {
    for (int c = 0; c < png.width; ++c) {
      ids(r, c) = png.at(r, c, 0) + 256 * png.at(r, c, 1) +
                  65536 * png.at(r, c, 2);
    }
  }
  return ids;
}

std::string panoptic_json(const PanopticDataset& dataset) {
  json images = json::array();
  json annotations = json::array();
  for (const auto& rec : dataset.records) {
    if (!(rec.map.categories() == dataset.categories)) {
      throw Error("record " + std::to_string(rec.image_id) +
                  ": category table differs from the dataset's");
    }
    images.push_back({{"id", rec.image_id},
                      {"file_name", rec.image_file},
                      {"width", rec.map.width()},
                      {"height", rec.map.height()}});
    json segments = json::array();
    for (const auto& s : rec.map.segments()) {
      segments.push_back({{"id", s.id},
                          {"category_id", s.category_id},
                          {"area", s.area},
                          {"bbox", segment_bbox(rec.map.segment_ids(), s.id)},
                          {"iscrowd", 0}});
    }
    annotations.push_back({{"image_id", rec.image_id},
                           {"file_name", rec.png_file},
                           {"segments_info", std::move(segments)}});
  }
  json doc = {{"images", std::move(images)},
              {"annotations", std::move(annotations)},
              {"categories", categories_to_json(dataset.categories)}};
  return doc.dump(2) + "\n";
}

fs::path png_dir_for(const fs::path& json_path) {
  fs::path dir = json_path;
  dir.replace_extension();
  return dir;
}

void write_panoptic(const fs::path& json_path, const PanopticDataset& dataset) {
  const std::string text = panoptic_json(dataset);
  const fs::path dir = png_dir_for(json_path);
  fs::create_directories(dir);
  for (const auto& rec : dataset.records) {
    write_png(dir / rec.png_file, encode_id_map(rec.map.segment_ids()));
  }
  write_file(json_path, std::span(reinterpret_cast<const std::uint8_t*>(
                                      text.data()),
                                  text.size()));
}

PanopticDataset read_panoptic(const fs::path& json_path) {
  const json doc = parse_json_file(json_path);
  const std::string where = json_path.string();
  PanopticDataset out;
  out.categories = categories_from_json(
      doc.contains("categories") ? doc.at("categories") : json(), where);

  std::map<std::int64_t, json> images;
  for (const auto& img : field<json>(doc, "images", where)) {
    const auto id = field<std::int64_t>(img, "id", where);
    if (!images.emplace(id, img).second) {
      throw Error(where + ": duplicate image id " + std::to_string(id));
    }
  }
  const fs::path dir = png_dir_for(json_path);
  std::set<std::int64_t> seen;
  for (const auto& ann : field<json>(doc, "annotations", where)) {
    const auto image_id = field<std::int64_t>(ann, "image_id", where);
    const std::string ctx = where + " image " + std::to_string(image_id);
    auto it = images.find(image_id);
    if (it == images.end()) throw Error(ctx + ": no matching images entry");
    if (!seen.insert(image_id).second) throw Error(ctx + ": annotated twice");
    const auto png_file = field<std::string>(ann, "file_name", ctx);
    const PngImage png = read_png(dir / png_file);
    const int width = field<int>(it->second, "width", ctx);
    const int height = field<int>(it->second, "height", ctx);
    if (png.width != width || png.height != height) {
      throw Error(ctx + ": PNG is " + std::to_string(png.width) + "x" +
                  std::to_string(png.height) + ", images entry says " +
                  std::to_string(width) + "x" + std::to_string(height));
    }
    LabelRaster ids = decode_id_map(png);
    std::vector<Segment> segments;
    std::map<std::int32_t, std::array<std::int64_t, 4>> boxes;
    for (const auto& s : field<json>(ann, "segments_info", ctx)) {
      Segment seg{field<std::int32_t>(s, "id", ctx),
                  field<std::int32_t>(s, "category_id", ctx),
                  field<std::int64_t>(s, "area", ctx)};
      if (s.contains("bbox")) {
        boxes[seg.id] = field<std::array<std::int64_t, 4>>(s, "bbox", ctx);
      }
      segments.push_back(seg);
    }
    try {
      PanopticMap map(ids, std::move(segments), out.categories);
      for (const auto& [id, box] : boxes) {
        if (segment_bbox(map.segment_ids(), id) != box) {
          throw Error("segment " + std::to_string(id) + ": bbox mismatch");
        }
      }
      out.records.push_back({image_id,
                             field<std::string>(it->second, "file_name", ctx),
                             png_file, std::move(map)});
    } catch (const Error& e) {
      throw Error(ctx + ": " + e.what());
    }
  }
  if (seen.size() != images.size()) {
    throw Error(where + ": some images have no annotation");
  }
  return out;
}

InstanceManifest read_instances(const fs::path& manifest_path) {
  const json doc = parse_json_file(manifest_path);
  const std::string where = manifest_path.string();
  const fs::path base = manifest_path.parent_path();
  InstanceManifest out;
  out.categories = categories_from_json(
      doc.contains("categories") ? doc.at("categories") : json(), where);
  for (const auto& img : field<json>(doc, "images", where)) {
    ManifestImage entry;
    entry.id = field<std::int64_t>(img, "id", where);
    const std::string ctx = where + " image " + std::to_string(entry.id);
    entry.file_name = field<std::string>(img, "file_name", ctx);
    entry.width = field<int>(img, "width", ctx);
    entry.height = field<int>(img, "height", ctx);
    if (entry.width < 1 || entry.height < 1) {
      throw Error(ctx + ": dimensions must be positive");
    }
    const json instances =
        img.contains("instances") ? img.at("instances") : json::array();
    int index = 0;
    for (const auto& inst : instances) {
      const std::string ictx = ctx + " instance " + std::to_string(index);
      const double score = field<double>(inst, "score", ictx);
      const auto category = field<std::int32_t>(inst, "category_id", ictx);
      if (!out.categories.is_thing(category)) {
        throw Error(ictx + ": category " + std::to_string(category) +
                    " is not a thing class");
      }
      std::optional<BinaryMask> mask;
      if (inst.contains("rle")) {
        const json& rle = inst.at("rle");
        const auto size = field<std::array<int, 2>>(rle, "size", ictx);
        if (size[0] != entry.height || size[1] != entry.width) {
          throw Error(ictx + ": RLE size does not match the image");
        }
        const auto counts = field<std::vector<std::uint32_t>>(rle, "counts", ictx);
        try {
          mask = rle_decode(counts, entry.width, entry.height);
        } catch (const Error& e) {
          throw Error(ictx + ": " + e.what());
        }
      } else if (inst.contains("mask")) {
        const fs::path path = base / field<std::string>(inst, "mask", ictx);
        if (!fs::exists(path)) {
          throw Error(ictx + ": missing mask file " + path.string());
        }
        mask = read_mask_png(path);
        if (mask->width() != entry.width || mask->height() != entry.height) {
          throw Error(ictx + ": mask PNG size does not match the image");
        }
      } else {
        throw Error(ictx + ": needs an 'rle' or 'mask' field");
      }
      try {
        entry.instances.push_back(
            make_instance(index, std::move(*mask), score, category));
      } catch (const Error& e) {
        throw Error(ictx + ": " + e.what());
      }
      ++index;
    }
    out.images.push_back(std::move(entry));
  }
  return out;
}

void write_instances(const fs::path& manifest_path,
                     const InstanceManifest& manifest) {
  json images = json::array();
  for (const auto& img : manifest.images) {
    json instances = json::array();
    for (const auto& inst : img.instances) {
      instances.push_back(
          {{"score", inst.score},
           {"category_id", inst.category},
           {"rle",
            {{"size", {img.height, img.width}},
             {"counts", rle_encode(inst.mask)}}}});
    }
    images.push_back({{"id", img.id},
                      {"file_name", img.file_name},
                      {"width", img.width},
                      {"height", img.height},
                      {"instances", std::move(instances)}});
  }
  json doc = {{"categories", categories_to_json(manifest.categories)},
              {"images", std::move(images)}};
  const std::string text = doc.dump(2) + "\n";
  write_file(manifest_path,
             std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                       text.size()));
}

RgbImage read_rgb(const fs::path& path) {
  const PngImage png = read_png(path);
  if (png.bit_depth != 8) throw Error(path.string() + ": expected 8-bit PNG");
  std::vector<std::uint8_t> rgb(std::size_t(png.width) * png.height * 3);
  for (std::size_t i = 0; i < std::size_t(png.width) * png.height; ++i) {
    for (int k = 0; k < 3; ++k) {
      rgb[3 * i + k] =
          std::uint8_t(png.samples[i * png.channels + (png.channels == 3 ? k : 0)]);
    }
  }
  return RgbImage::from_interleaved(png.width, png.height, rgb);
}

void write_rgb(const fs::path& path, const RgbImage& image) {
  PngImage png;
  png.width = image.width();
  png.height = image.height();
  png.channels = 3;
  const auto bytes = image.to_interleaved();
  png.samples.assign(bytes.begin(), bytes.end());
  write_png(path, png);
}

SemanticMap read_semantic(const fs::path& path,
                          const CategoryTable& categories) {
  const PngImage png = read_png(path);
  if (png.channels != 1) {
    throw Error(path.string() + ": semantic map must be single-channel");
  }
  LabelRaster labels(png.height, png.width);
  for (int r = 0; r < png.height; ++r) {
    for (int c = 0; c < png.width; ++c) labels(r, c) = png.at(r, c);
  }
  try {
    return SemanticMap(std::move(labels), categories);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_semantic(const fs::path& path, const SemanticMap& map) {
  const auto& labels = map.labels();
  const auto max_label = labels.maxCoeff();
  if (labels.minCoeff() < 0 || max_label > 65535) {
    throw Error("semantic labels must fit in 16 bits");
  }
  PngImage png;
  png.width = map.width();
  png.height = map.height();
  png.channels = 1;
  png.bit_depth = max_label > 255 ? 16 : 8;
  png.samples.resize(std::size_t(png.width) * png.height);
  for (int r = 0; r < png.height; ++r) {
    for (int c = 0; c < png.width; ++c) {
      png.samples[std::size_t(r) * png.width + c] = std::uint16_t(labels(r, c));
    }
  }
  write_png(path, png);
}

BinaryMask read_mask_png(const fs::path& path) {
  const PngImage png = read_png(path);
  MaskArray bits(png.height, png.width);
  for (int r = 0; r < png.height; ++r) {
    for (int c = 0; c < png.width; ++c) {
      bool any = false;
      for (int k = 0; k < png.channels; ++k) any = any || png.at(r, c, k) > 0;
      bits(r, c) = any;
    }
  }
  return BinaryMask(std::move(bits));
}

}  // namespace pfuse

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

#include "pfuse/png.hpp"

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "pfuse/error.hpp"

namespace pfuse {

namespace {

struct Cursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

struct ErrorSlot {
  char message[256];
};

void on_error(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<ErrorSlot*>(png_get_error_ptr(png));
  std::snprintf(slot->message, sizeof slot->message, "%s", msg);
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

void read_bytes(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<Cursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->size) png_error(png, "unexpected end of data");
  std::memcpy(out, cur->data + cur->pos, n);
  cur->pos += n;
}

void write_bytes(png_structp png, png_bytep in, png_size_t n) {
  auto* sink = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  sink->insert(sink->end(), in, in + n);
}

void flush_noop(png_structp) {}

// Only trivially destructible locals live in the setjmp frames below; the
// buffers they fill belong to the caller.
bool decode_impl(Cursor* cur, PngImage* out, std::vector<png_byte>* raw,
                 ErrorSlot* err) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, err, on_error, on_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, cur, read_bytes);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  out->width = static_cast<int>(png_get_image_width(png, info));
  out->height = static_cast<int>(png_get_image_height(png, info));
  out->channels = png_get_channels(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw->resize(rowbytes * out->height);
  for (int r = 0; r < out->height; ++r) {
    png_read_row(png, raw->data() + rowbytes * r, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_impl(const PngImage* img, std::vector<std::uint8_t>* sink,
                 std::vector<png_byte>* raw, ErrorSlot* err) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, err, on_error, on_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, sink, write_bytes, flush_noop);
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(png, info, img->width, img->height, img->bit_depth,
               img->channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE,
               PNG_FILTER_TYPE_BASE);
  png_write_info(png, info);
  const std::size_t rowbytes =
      std::size_t(img->width) * img->channels * (img->bit_depth / 8);
  for (int r = 0; r < img->height; ++r) {
    png_write_row(png, raw->data() + rowbytes * r);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

PngImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error("not a PNG file");
  }
  Cursor cur{bytes.data(), bytes.size(), 0};
  PngImage out;
  std::vector<png_byte> raw;
  ErrorSlot err{};
  std::snprintf(err.message, sizeof err.message, "libpng failure");
  if (!decode_impl(&cur, &out, &raw, &err)) {
    throw Error(std::string("malformed PNG: ") + err.message);
  }
  if (out.channels != 1 && out.channels != 3) {
    throw Error("unsupported PNG channel count " +
                std::to_string(out.channels));
  }
  const std::size_t n = std::size_t(out.width) * out.height * out.channels;
  out.samples.resize(n);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] = std::uint16_t((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = raw[i];
  }
  return out;
}

PngImage read_png(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_png(bytes);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const PngImage& image) {
  if (image.width < 1 || image.height < 1) throw Error("PNG: empty image");
  if (image.channels != 1 && image.channels != 3) {
    throw Error("PNG: only gray or RGB images can be written");
  }
  if (image.bit_depth != 8 && image.bit_depth != 16) {
    throw Error("PNG: bit depth must be 8 or 16");
  }
  const std::size_t n = std::size_t(image.width) * image.height * image.channels;
  if (image.samples.size() != n) throw Error("PNG: sample count mismatch");
  std::vector<png_byte> raw;
  if (image.bit_depth == 16) {
    raw.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      raw[2 * i] = png_byte(image.samples[i] >> 8);
      raw[2 * i + 1] = png_byte(image.samples[i] & 0xff);
    }
  } else {
    raw.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (image.samples[i] > 255) throw Error("PNG: 8-bit sample above 255");
      raw[i] = png_byte(image.samples[i]);
    }
  }
  std::vector<std::uint8_t> sink;
  ErrorSlot err{};
  std::snprintf(err.message, sizeof err.message, "libpng failure");
  if (!encode_impl(&image, &sink, &raw, &err)) {
    throw Error(std::string("PNG encode failed: ") + err.message);
  }
  return sink;
}

void write_png(const std::filesystem::path& path, const PngImage& image) {
  write_file(path, encode_png(image));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace pfuse

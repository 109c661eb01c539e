// Copyright 2026 The soccer3d Authors
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

#include "soccer3d/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace soccer3d {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) fail(ErrorCode::kIo, "cannot open " + path.string());
  return f;
}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

DecodedPng decode_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) fail(ErrorCode::kFormat, path.string() + " is not a PNG");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) fail(ErrorCode::kIo, "libpng allocation failed");
  DecodedPng out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::kFormat, "corrupt PNG " + path.string());
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.data.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = out.data.data() + stride * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void encode_png(const std::filesystem::path& path, int width, int height, int color_type, int channels,
                const std::vector<std::uint8_t>& data) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) fail(ErrorCode::kIo, "libpng allocation failed");
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::kIo, "failed writing PNG " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(data.data() + stride * static_cast<std::size_t>(y));
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

Mask read_png_gray(const std::filesystem::path& path) {
  const DecodedPng png = decode_png(path);
  Mask out(png.width, png.height);
  for (std::size_t i = 0; i < out.storage().size(); ++i) out.storage()[i] = png.data[i * static_cast<std::size_t>(png.channels)];
  return out;
}

void write_png_gray(const std::filesystem::path& path, const Mask& image) {
  if (image.empty()) fail(ErrorCode::kInvalidArgument, "cannot write an empty PNG");
  encode_png(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, 1, image.storage());
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  const DecodedPng png = decode_png(path);
  RgbImage out(png.width, png.height);
  const auto c = static_cast<std::size_t>(png.channels);
  for (std::size_t i = 0; i < out.storage().size(); ++i) {
    const std::uint8_t* p = png.data.data() + i * c;
    if (c >= 3) {
      out.storage()[i] = {p[0] / 255.0f, p[1] / 255.0f, p[2] / 255.0f};
    } else {
      out.storage()[i] = {p[0] / 255.0f, p[0] / 255.0f, p[0] / 255.0f};
    }
  }
  return out;
}

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image) {
  if (image.empty()) fail(ErrorCode::kInvalidArgument, "cannot write an empty PNG");
  std::vector<std::uint8_t> data;
  data.reserve(image.storage().size() * 3);
  for (const Rgb& p : image.storage()) {
    data.push_back(to_byte(p.r));
    data.push_back(to_byte(p.g));
    data.push_back(to_byte(p.b));
  }
  encode_png(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 3, data);
}

Grid<float> read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::string magic;
  int width = 0;
  int height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (!in || magic != "Pf" || width <= 0 || height <= 0 || scale == 0.0) {
    fail(ErrorCode::kFormat, path.string() + " is not a single-channel PFM");
  }
  in.get();  // single whitespace before the raster
  const bool little = scale < 0.0;
  Grid<float> out(width, height);
  std::vector<std::uint32_t> row(static_cast<std::size_t>(width));
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    if (!in) fail(ErrorCode::kFormat, "truncated PFM " + path.string());
    for (int x = 0; x < width; ++x) {
      std::uint32_t bits = row[static_cast<std::size_t>(x)];
      if (little != (std::endian::native == std::endian::little)) bits = __builtin_bswap32(bits);
      out(x, y) = std::bit_cast<float>(bits);
    }
  }
  return out;
}

void write_pfm(const std::filesystem::path& path, const Grid<float>& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << "Pf\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
  std::vector<std::uint32_t> row(static_cast<std::size_t>(image.width()));
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(image(x, y));
      if constexpr (std::endian::native != std::endian::little) bits = __builtin_bswap32(bits);
      row[static_cast<std::size_t>(x)] = bits;
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
  }
  if (!out) fail(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace soccer3d

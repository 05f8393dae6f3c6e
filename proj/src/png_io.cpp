/*
 * Copyright 2026 TransWCD-CPP Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "wcd/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "wcd/errors.hpp"

namespace wcd {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

/// Decode any PNG to 8-bit rows with `want_channels` (1 = gray, 3 = rgb).
std::vector<std::vector<png_byte>> read_rows(const std::string& path, int want_channels, i64* out_h,
                                             i64* out_w) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error("cannot open for reading: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png_create_info_struct failed");
  }
  std::vector<std::vector<png_byte>> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("failed to decode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_byte color = png_get_color_type(png, info);
  png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (want_channels == 3) {
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
  } else {
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
      png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);

  const i64 h = static_cast<i64>(png_get_image_height(png, info));
  const i64 w = static_cast<i64>(png_get_image_width(png, info));
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(w * want_channels)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("unexpected PNG row layout in " + path);
  }
  rows.assign(static_cast<std::size_t>(h), std::vector<png_byte>(rowbytes));
  std::vector<png_bytep> ptrs(static_cast<std::size_t>(h));
  for (i64 i = 0; i < h; ++i) ptrs[i] = rows[i].data();
  png_read_image(png, ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  *out_h = h;
  *out_w = w;
  return rows;
}

void write_rows(const std::string& path, const std::vector<std::vector<png_byte>>& rows, i64 w,
                int channels) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("failed to encode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(rows.size()), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (const auto& row : rows) png_write_row(png, const_cast<png_bytep>(row.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

png_byte to_byte(double v) {
  double r = std::lround(v);
  return static_cast<png_byte>(r < 0.0 ? 0 : (r > 255.0 ? 255 : r));
}

}  // namespace

Tensor read_image_rgb(const std::string& path) {
  i64 h = 0, w = 0;
  auto rows = read_rows(path, 3, &h, &w);
  Tensor img({3, h, w});
  for (i64 y = 0; y < h; ++y)
    for (i64 x = 0; x < w; ++x)
      for (i64 c = 0; c < 3; ++c)
        img.at(c, y, x) = static_cast<double>(rows[y][x * 3 + c]) / 255.0;
  return img;
}

Tensor read_image_gray(const std::string& path) {
  i64 h = 0, w = 0;
  auto rows = read_rows(path, 1, &h, &w);
  Tensor img({h, w});
  for (i64 y = 0; y < h; ++y)
    for (i64 x = 0; x < w; ++x) img.at(y, x) = static_cast<double>(rows[y][x]);
  return img;
}

void write_image_rgb(const std::string& path, const Tensor& img) {
  if (img.ndim() != 3 || img.size(0) != 3)
    throw ShapeMismatch("write_image_rgb: expected (3,H,W), got " + shape_str(img.shape()));
  const i64 h = img.size(1), w = img.size(2);
  std::vector<std::vector<png_byte>> rows(static_cast<std::size_t>(h),
                                          std::vector<png_byte>(static_cast<std::size_t>(w * 3)));
  for (i64 y = 0; y < h; ++y)
    for (i64 x = 0; x < w; ++x)
      for (i64 c = 0; c < 3; ++c) rows[y][x * 3 + c] = to_byte(255.0 * img.at(c, y, x));
  write_rows(path, rows, w, 3);
}

void write_image_gray(const std::string& path, const Tensor& img) {
  if (img.ndim() != 2)
    throw ShapeMismatch("write_image_gray: expected (H,W), got " + shape_str(img.shape()));
  const i64 h = img.size(0), w = img.size(1);
  std::vector<std::vector<png_byte>> rows(static_cast<std::size_t>(h),
                                          std::vector<png_byte>(static_cast<std::size_t>(w)));
  for (i64 y = 0; y < h; ++y)
    for (i64 x = 0; x < w; ++x) rows[y][x] = to_byte(img.at(y, x));
  write_rows(path, rows, w, 1);
}

}  // namespace wcd

// Copyright 2026 The tadacap Authors.
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
#include "tadacap/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "tadacap/errors.hpp"

namespace tadacap::render {
namespace {

struct Canvas {
  int width;
  int height;
  std::vector<std::uint8_t> px;

  void stamp(int x, int y, int size, std::uint8_t value) {
    for (int dy = 0; dy < size; ++dy) {
      for (int dx = 0; dx < size; ++dx) {
        const int xx = x + dx;
        const int yy = y + dy;
        if (xx >= 0 && xx < width && yy >= 0 && yy < height) {
          px[static_cast<std::size_t>(yy) * static_cast<std::size_t>(width) + static_cast<std::size_t>(xx)] = value;
        }
      }
    }
  }

  // Bresenham between two pixel centres.
  void line(int x0, int y0, int x1, int y1, int size, std::uint8_t value) {
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
      stamp(x0, y0, size, value);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }
};

void write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void flush_noop(png_structp) {}

[[noreturn]] void png_fail(png_structp, png_const_charp msg) { throw FormatError(std::string("libpng: ") + msg); }

void png_warn(png_structp, png_const_charp) {}

struct ReadCursor {
  std::span<const std::uint8_t> data;
  std::size_t offset = 0;
};

void read_from_span(png_structp png, png_bytep out, png_size_t len) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + len > cur->data.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cur->data.data() + cur->offset, len);
  cur->offset += len;
}

}  // namespace

std::vector<std::uint8_t> render_series(std::span<const double> series, const PlotStyle& style) {
  if (series.size() < 2) throw InvalidArgument("render_series: need at least 2 points");
  for (double v : series) {
    if (!std::isfinite(v)) throw InvalidArgument("render_series: non-finite value in series");
  }
  if (style.width <= 2 * style.margin + 1 || style.height <= 2 * style.margin + 1) {
    throw InvalidArgument("render_series: canvas too small for margins");
  }

  Canvas canvas{style.width, style.height,
                std::vector<std::uint8_t>(static_cast<std::size_t>(style.width) * static_cast<std::size_t>(style.height),
                                          style.background)};
  const int plot_w = style.width - 2 * style.margin - style.line_thickness;
  const int plot_h = style.height - 2 * style.margin - style.line_thickness;

  if (style.grid && style.grid_lines > 0) {
    for (int g = 0; g <= style.grid_lines; ++g) {
      const int y = style.margin + g * plot_h / style.grid_lines;
      const int x = style.margin + g * plot_w / style.grid_lines;
      canvas.line(style.margin, y, style.margin + plot_w, y, 1, style.grid_color);
      canvas.line(x, style.margin, x, style.margin + plot_h, 1, style.grid_color);
    }
  }

  const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  const std::size_t n = series.size();
  auto to_px = [&](std::size_t i) {
    const int x = style.margin + static_cast<int>(std::lround(static_cast<double>(i) * plot_w / static_cast<double>(n - 1)));
    const double frac = range > 0.0 ? (series[i] - lo) / range : 0.5;
    const int y = style.margin + static_cast<int>(std::lround((1.0 - frac) * plot_h));
    return std::pair{x, y};
  };
  auto [px, py] = to_px(0);
  for (std::size_t i = 1; i < n; ++i) {
    const auto [qx, qy] = to_px(i);
    canvas.line(px, py, qx, qy, style.line_thickness, style.line);
    px = qx;
    py = qy;
  }

  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (png == nullptr) throw Error("libpng: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("libpng: cannot create info struct");
  }
  try {
    png_set_write_fn(png, &out, write_to_vector, flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(style.width), static_cast<png_uint_32>(style.height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    for (int y = 0; y < style.height; ++y) {
      png_write_row(png, canvas.px.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(style.width));
    }
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

GrayImage decode_png(std::span<const std::uint8_t> data) {
  if (data.size() < 8 || png_sig_cmp(data.data(), 0, 8) != 0) throw FormatError("decode_png: not a PNG stream");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (png == nullptr) throw Error("libpng: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng: cannot create info struct");
  }
  GrayImage img;
  try {
    ReadCursor cursor{data, 0};
    png_set_read_fn(png, &cursor, read_from_span);
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    const auto color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
      png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    const auto rowbytes = png_get_rowbytes(png, info);
    if (rowbytes != static_cast<png_size_t>(img.width)) throw FormatError("decode_png: unexpected row layout");
    img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = img.pixels.data() + static_cast<std::size_t>(y) * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace tadacap::render

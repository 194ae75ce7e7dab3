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
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tadacap::render {

struct PlotStyle {
  int width = 448;
  int height = 224;
  int margin = 8;
  int line_thickness = 2;
  std::uint8_t background = 255;
  std::uint8_t line = 0;
  std::uint8_t grid_color = 200;
  bool grid = false;
  int grid_lines = 4;
};

// Single-line plot as an 8-bit grayscale PNG. Byte-identical for identical
// input and style. A constant series is drawn at mid-height.
std::vector<std::uint8_t> render_series(std::span<const double> series, const PlotStyle& style = {});

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
};

// Decodes any PNG to 8-bit grayscale.
GrayImage decode_png(std::span<const std::uint8_t> png);

}  // namespace tadacap::render

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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "soccer3d/error.hpp"

namespace soccer3d {

struct ImageSize {
  int width = 0;
  int height = 0;

  bool operator==(const ImageSize&) const = default;
  std::size_t area() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
};

// Row-major H x W raster. (x, y) is (column, row).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(ImageSize size, T fill = T{}) : size_(size), data_(size.area(), fill) {}
  Grid(int width, int height, T fill = T{}) : Grid(ImageSize{width, height}, fill) {}

  ImageSize size() const { return size_; }
  int width() const { return size_.width; }
  int height() const { return size_.height; }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) + static_cast<std::size_t>(x);
  }

  bool operator==(const Grid&) const = default;

 private:
  ImageSize size_;
  std::vector<T> data_;
};

struct Rgb {
  float r = 0.0f;
  float g = 0.0f;
  float b = 0.0f;
  bool operator==(const Rgb&) const = default;
};

using Mask = Grid<std::uint8_t>;
using RgbImage = Grid<Rgb>;

template <typename A, typename B>
void require_same_size(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (a.size() != b.size()) fail(ErrorCode::kDimensionMismatch, std::string(what) + ": dimension mismatch");
}

}  // namespace soccer3d

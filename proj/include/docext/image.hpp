///////////////////////////////////////////////////////////////////////
// File:        image.hpp
// Description: Row-major raster types and the Region bounding box.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
///////////////////////////////////////////////////////////////////////

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "docext/error.hpp"

namespace docext {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major raster of `T`. An empty raster (0x0) is allowed so that
/// default-constructed values are cheap; operations document when they
/// require non-empty input. `Tag` keeps rasters with the same storage but
/// different meaning apart.
template <typename T, typename Tag = void>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw Error(Errc::BadImage, "negative raster dimensions");
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Raster(int width, int height, std::vector<T> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 0 || height < 0 ||
        pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw Error(Errc::BadImage, "pixel count does not match " + std::to_string(width) + "x" +
                                      std::to_string(height));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::size_t size() const noexcept { return pixels_.size(); }

  T& at(int x, int y) { return pixels_[index(x, y)]; }
  const T& at(int x, int y) const { return pixels_[index(x, y)]; }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<T> row(int y) { return {pixels_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int y) const {
    return {pixels_.data() + index(0, y), static_cast<std::size_t>(width_)};
  }

  std::span<T> pixels() noexcept { return pixels_; }
  std::span<const T> pixels() const noexcept { return pixels_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> pixels_;
};

using RgbImage = Raster<Rgb>;
using GrayImage = Raster<std::uint8_t>;
struct BinaryTag;
/// Nonzero = foreground (text). Stored as bytes so rows can be spans.
using BinaryImage = Raster<std::uint8_t, BinaryTag>;

/// Axis-aligned box in top-left-origin pixel coordinates; `area` counts the
/// foreground pixels of the component that produced it.
struct Region {
  int x = 0, y = 0, w = 0, h = 0;
  std::size_t area = 0;

  int right() const noexcept { return x + w; }
  int bottom() const noexcept { return y + h; }

  friend bool operator==(const Region&, const Region&) = default;
};

template <typename T, typename Tag>
Raster<T, Tag> crop(const Raster<T, Tag>& img, const Region& r) {
  if (r.x < 0 || r.y < 0 || r.w < 0 || r.h < 0 || r.right() > img.width() || r.bottom() > img.height())
    throw Error(Errc::BadImage, "crop region outside image bounds");
  Raster<T, Tag> out(r.w, r.h);
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) out.at(x, y) = img.at(r.x + x, r.y + y);
  return out;
}

/// Foreground rendered black on white.
inline GrayImage to_gray(const BinaryImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 0 : 255;
  return out;
}

inline RgbImage to_rgb(const GrayImage& img) {
  RgbImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = {src[i], src[i], src[i]};
  return out;
}

}  // namespace docext

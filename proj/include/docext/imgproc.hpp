///////////////////////////////////////////////////////////////////////
// File:        imgproc.hpp
// Description: Page preprocessing: grayscale, resize, Gaussian blur,
//              Otsu binarization and connected-component text regions.
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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "docext/error.hpp"
#include "docext/image.hpp"

namespace docext::imgproc {

/// ITU-R BT.601 luma, rounded to nearest.
inline GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double y = 0.299 * src[i].r + 0.587 * src[i].g + 0.114 * src[i].b;
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
  }
  return out;
}

/// Bilinear resampling with pixel-center alignment and edge clamping.
/// Output dimensions are round(scale * input dimensions).
inline GrayImage resize(const GrayImage& img, double scale) {
  if (!(scale > 0.0)) throw Error(Errc::DegenerateSize, "scale must be positive");
  const long ow = std::lround(scale * img.width());
  const long oh = std::lround(scale * img.height());
  if (ow < 1 || oh < 1)
    throw Error(Errc::DegenerateSize, "scale " + std::to_string(scale) + " collapses a " +
                                          std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                          " image");
  if (ow > 1 << 16 || oh > 1 << 16) throw Error(Errc::DegenerateSize, "resized image too large");

  // Per-axis source coordinate, lower tap and fractional weight.
  struct Tap {
    int lo, hi;
    double frac;
  };
  auto taps = [](int in, int out) {
    std::vector<Tap> t(static_cast<std::size_t>(out));
    const double ratio = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
      double s = (i + 0.5) * ratio - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(in - 1));
      const int lo = static_cast<int>(std::floor(s));
      t[static_cast<std::size_t>(i)] = {lo, std::min(lo + 1, in - 1), s - lo};
    }
    return t;
  };
  const auto tx = taps(img.width(), static_cast<int>(ow));
  const auto ty = taps(img.height(), static_cast<int>(oh));

  GrayImage out(static_cast<int>(ow), static_cast<int>(oh));
  for (int y = 0; y < oh; ++y) {
    const Tap& vy = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < ow; ++x) {
      const Tap& vx = tx[static_cast<std::size_t>(x)];
      const double top = img.at(vx.lo, vy.lo) * (1.0 - vx.frac) + img.at(vx.hi, vy.lo) * vx.frac;
      const double bot = img.at(vx.lo, vy.hi) * (1.0 - vx.frac) + img.at(vx.hi, vy.hi) * vx.frac;
      const double v = top * (1.0 - vy.frac) + bot * vy.frac;
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

/// Sampled Gaussian of odd length `size`, normalized to unit sum.
inline std::vector<double> gaussian_kernel(int size, double sigma) {
  if (size < 3 || size % 2 == 0)
    throw Error(Errc::BadKernel, "kernel size must be odd and >= 3, got " + std::to_string(size));
  if (!(sigma > 0.0)) throw Error(Errc::BadKernel, "sigma must be positive");
  const int r = size / 2;
  std::vector<double> k(static_cast<std::size_t>(size));
  for (int i = -r; i <= r; ++i) k[static_cast<std::size_t>(i + r)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

/// Separable Gaussian blur with replicated borders. The horizontal pass is
/// kept in floating point; only the final result is rounded.
inline GrayImage gaussian_blur(const GrayImage& img, int kernel_size, double sigma) {
  const std::vector<double> k = gaussian_kernel(kernel_size, sigma);
  const int r = kernel_size / 2;
  const int w = img.width(), h = img.height();
  if (img.empty()) return img;

  std::vector<double> tmp(img.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * img.at(std::clamp(x + i, 0, w - 1), y);
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i)
        acc += k[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
    }
  }
  return out;
}

struct Threshold {
  int value = 0;
  BinaryImage binary;
};

inline std::array<std::uint64_t, 256> histogram(const GrayImage& img) {
  std::array<std::uint64_t, 256> h{};
  for (std::uint8_t v : img.pixels()) ++h[v];
  return h;
}

namespace detail {

/// a/b > c/d for non-negative numerators and positive denominators, exact.
inline bool fraction_greater(unsigned __int128 a, unsigned __int128 b, unsigned __int128 c, unsigned __int128 d) {
  const unsigned __int128 qa = a / b, qc = c / d;
  if (qa != qc) return qa > qc;
  return (a % b) * d > (c % d) * b;
}

}  // namespace detail

/// Global Otsu threshold. Pixels strictly below the threshold become
/// foreground. Among thresholds with equal between-class variance the
/// lowest wins; an image with a single gray level yields that level and an
/// all-background result.
///
/// The between-class variance for threshold t is proportional to
/// (N*S0 - S*W0)^2 / (W0*W1), with W0/S0 the count/sum of pixels below t.
/// That ratio is compared exactly in 128-bit integers while N*S fits in 64
/// bits (pages up to ~16M pixels), and in long double beyond.
inline Threshold otsu_threshold(const GrayImage& img) {
  const auto hist = histogram(img);
  std::uint64_t total = 0, total_sum = 0;
  int distinct = 0, only_level = 0;
  for (int v = 0; v < 256; ++v) {
    total += hist[v];
    total_sum += hist[v] * static_cast<std::uint64_t>(v);
    if (hist[v]) {
      ++distinct;
      only_level = v;
    }
  }

  int best_t = 0;
  if (distinct == 1) {
    best_t = only_level;
  } else if (distinct > 1) {
    const bool exact = total < (1ULL << 24);
    unsigned __int128 best_num = 0, best_den = 1;
    long double best_ld = -1.0L;
    std::uint64_t w0 = 0, s0 = 0;
    for (int t = 1; t < 256; ++t) {
      w0 += hist[t - 1];
      s0 += hist[t - 1] * static_cast<std::uint64_t>(t - 1);
      const std::uint64_t w1 = total - w0;
      if (w0 == 0 || w1 == 0) continue;
      if (exact) {
        const __int128 diff = static_cast<__int128>(total) * s0 - static_cast<__int128>(total_sum) * w0;
        const unsigned __int128 num = static_cast<unsigned __int128>(diff < 0 ? -diff : diff) *
                                      static_cast<unsigned __int128>(diff < 0 ? -diff : diff);
        const unsigned __int128 den = static_cast<unsigned __int128>(w0) * w1;
        if (best_t == 0 || detail::fraction_greater(num, den, best_num, best_den)) {
          best_num = num;
          best_den = den;
          best_t = t;
        }
      } else {
        const long double diff = static_cast<long double>(total) * s0 - static_cast<long double>(total_sum) * w0;
        const long double v = diff * diff / (static_cast<long double>(w0) * w1);
        if (v > best_ld) {
          best_ld = v;
          best_t = t;
        }
      }
    }
  }

  Threshold out{best_t, BinaryImage(img.width(), img.height())};
  auto src = img.pixels();
  auto dst = out.binary.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] < best_t ? 1 : 0;
  return out;
}

/// Rectangular structuring element, anchored at its center.
struct Dilation {
  bool enabled = true;
  int width = 9;
  int height = 3;
};

/// Binary dilation by a width x height rectangle (separable max filter).
inline BinaryImage dilate(const BinaryImage& img, int width, int height) {
  if (width < 1 || height < 1) throw Error(Errc::BadKernel, "structuring element must be at least 1x1");
  const int w = img.width(), h = img.height();
  const int left = width / 2, right = width - 1 - width / 2;
  const int up = height / 2, down = height - 1 - height / 2;

  // A pixel is set when any source pixel lies within the window; done with
  // running counts so cost is independent of the element size.
  BinaryImage horiz(w, h);
  for (int y = 0; y < h; ++y) {
    auto src = img.row(y);
    auto dst = horiz.row(y);
    std::vector<int> prefix(static_cast<std::size_t>(w) + 1, 0);
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + (src[x] ? 1 : 0);
    for (int x = 0; x < w; ++x) {
      const int lo = std::max(0, x - right), hi = std::min(w - 1, x + left);
      dst[x] = prefix[hi + 1] - prefix[lo] > 0 ? 1 : 0;
    }
  }
  BinaryImage out(w, h);
  std::vector<int> prefix(static_cast<std::size_t>(h) + 1, 0);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + (horiz.at(x, y) ? 1 : 0);
    for (int y = 0; y < h; ++y) {
      const int lo = std::max(0, y - down), hi = std::min(h - 1, y + up);
      out.at(x, y) = prefix[hi + 1] - prefix[lo] > 0 ? 1 : 0;
    }
  }
  return out;
}

/// Tight box plus pixel list of one 8-connected foreground component.
struct Component {
  Region box;
  std::vector<std::pair<int, int>> pixels;
};

/// 8-connected components in raster order of their first pixel.
inline std::vector<Component> connected_components(const BinaryImage& img) {
  const int w = img.width(), h = img.height();
  std::vector<std::uint8_t> seen(img.size(), 0);
  std::vector<Component> out;
  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t i0 = static_cast<std::size_t>(y0) * w + x0;
      if (!img.at(x0, y0) || seen[i0]) continue;
      Component c;
      int minx = x0, maxx = x0, miny = y0, maxy = y0;
      seen[i0] = 1;
      stack.push_back({x0, y0});
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        c.pixels.push_back({x, y});
        minx = std::min(minx, x);
        maxx = std::max(maxx, x);
        miny = std::min(miny, y);
        maxy = std::max(maxy, y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (!img.contains(nx, ny) || !img.at(nx, ny)) continue;
            const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
            if (seen[ni]) continue;
            seen[ni] = 1;
            stack.push_back({nx, ny});
          }
        }
      }
      c.box = {minx, miny, maxx - minx + 1, maxy - miny + 1, c.pixels.size()};
      out.push_back(std::move(c));
    }
  }
  return out;
}

/// Bounding boxes of 8-connected foreground components with at least
/// `min_area` pixels, after optional dilation so neighbouring glyphs fuse
/// into line or block regions. Areas count pixels of the dilated image.
inline std::vector<Region> detect_regions(const BinaryImage& img, std::size_t min_area,
                                          const Dilation& dilation = {}) {
  if (min_area < 1) throw Error(Errc::BadKernel, "min_area must be >= 1");
  const BinaryImage work = dilation.enabled ? dilate(img, dilation.width, dilation.height) : img;
  std::vector<Region> out;
  for (auto& c : connected_components(work))
    if (c.box.area >= min_area) out.push_back(c.box);
  return out;
}

/// Groups regions into text lines. Two regions share a line when their
/// vertical ranges overlap by at least half the smaller height; the relation
/// is closed transitively. Lines come back top-to-bottom by mean top edge,
/// each holding region indices left-to-right by x; ties keep input order.
inline std::vector<std::vector<std::size_t>> group_lines(const std::vector<Region>& regions) {
  const std::size_t n = regions.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Region& a = regions[i];
      const Region& b = regions[j];
      const int overlap = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
      const int smaller = std::min(a.h, b.h);
      if (overlap > 0 && 2 * overlap >= smaller) {
        const std::size_t ra = find(i), rb = find(j);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }

  struct Line {
    std::vector<std::size_t> members;
    double mean_y = 0.0;
  };
  std::vector<Line> lines;
  std::vector<std::size_t> line_of(n, static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (line_of[root] == static_cast<std::size_t>(-1)) {
      line_of[root] = lines.size();
      lines.emplace_back();
    }
    lines[line_of[root]].members.push_back(i);
  }
  for (Line& l : lines) {
    double sum = 0.0;
    for (std::size_t i : l.members) sum += regions[i].y;
    l.mean_y = sum / static_cast<double>(l.members.size());
    std::stable_sort(l.members.begin(), l.members.end(),
                     [&](std::size_t a, std::size_t b) { return regions[a].x < regions[b].x; });
  }
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.mean_y < b.mean_y; });

  std::vector<std::vector<std::size_t>> out;
  out.reserve(lines.size());
  for (Line& l : lines) out.push_back(std::move(l.members));
  return out;
}

/// Regions in reading order: lines top-to-bottom, left-to-right within a line.
inline std::vector<Region> reading_order(const std::vector<Region>& regions) {
  std::vector<Region> out;
  out.reserve(regions.size());
  for (const auto& line : group_lines(regions))
    for (std::size_t i : line) out.push_back(regions[i]);
  return out;
}

/// Parameters of the preprocessing chain. Resize is skipped at scale 1.0 and
/// blur when `blur_kernel` is 0.
struct PreprocessOptions {
  double scale = 1.0;
  int blur_kernel = 5;
  double blur_sigma = 1.0;
};

struct Preprocessed {
  GrayImage gray;     // after grayscale and resize
  GrayImage blurred;  // input to thresholding
  int threshold = 0;
  BinaryImage binary;
};

inline Preprocessed preprocess(const RgbImage& page, const PreprocessOptions& opts = {}) {
  Preprocessed p;
  p.gray = to_grayscale(page);
  if (opts.scale != 1.0) p.gray = resize(p.gray, opts.scale);
  p.blurred = opts.blur_kernel == 0 ? p.gray : gaussian_blur(p.gray, opts.blur_kernel, opts.blur_sigma);
  Threshold t = otsu_threshold(p.blurred);
  p.threshold = t.value;
  p.binary = std::move(t.binary);
  return p;
}

/// Draws region outlines over a grayscale page, for debug dumps.
inline RgbImage overlay_regions(const GrayImage& page, const std::vector<Region>& regions,
                                Rgb color = {255, 0, 0}) {
  RgbImage out = to_rgb(page);
  for (const Region& r : regions) {
    for (int x = r.x; x < r.right(); ++x) {
      if (out.contains(x, r.y)) out.at(x, r.y) = color;
      if (out.contains(x, r.bottom() - 1)) out.at(x, r.bottom() - 1) = color;
    }
    for (int y = r.y; y < r.bottom(); ++y) {
      if (out.contains(r.x, y)) out.at(r.x, y) = color;
      if (out.contains(r.right() - 1, y)) out.at(r.right() - 1, y) = color;
    }
  }
  return out;
}

}  // namespace docext::imgproc

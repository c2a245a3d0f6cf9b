///////////////////////////////////////////////////////////////////////
// File:        test_imgproc.cpp
// Description: Grayscale, resize, blur, Otsu, regions and reading order.
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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "docext/imgproc.hpp"
#include "support/oracles.hpp"

using namespace docext;
using namespace docext::imgproc;

namespace {

GrayImage random_gray(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> v(0, 255);
  GrayImage img(w, h);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(v(rng));
  return img;
}

BinaryImage from_rows(const std::vector<std::string>& rows) {
  BinaryImage img(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) img.at(x, y) = rows[y][x] == '#';
  return img;
}

void fill(BinaryImage& img, int x, int y, int w, int h) {
  for (int yy = y; yy < y + h; ++yy)
    for (int xx = x; xx < x + w; ++xx) img.at(xx, yy) = 1;
}

Region box(int x, int y, int w, int h) { return {x, y, w, h, static_cast<std::size_t>(w * h)}; }

}  // namespace

TEST(Grayscale, Examples) {
  RgbImage img(3, 1);
  img.at(0, 0) = {255, 255, 255};
  img.at(1, 0) = {0, 0, 0};
  img.at(2, 0) = {255, 0, 0};
  const GrayImage g = to_grayscale(img);
  EXPECT_EQ(g.at(0, 0), 255);
  EXPECT_EQ(g.at(1, 0), 0);
  EXPECT_EQ(g.at(2, 0), 76);
}

TEST(Grayscale, IdempotentOnGrayLiftedToRgb) {
  std::mt19937 rng(3);
  const GrayImage g = random_gray(rng, 17, 9);
  EXPECT_EQ(to_grayscale(to_rgb(g)), g);
}

TEST(Resize, IdentityAtScaleOne) {
  std::mt19937 rng(5);
  const GrayImage g = random_gray(rng, 13, 7);
  EXPECT_EQ(resize(g, 1.0), g);
}

TEST(Resize, SinglePixelUpscale) {
  GrayImage g(1, 1, 77);
  const GrayImage r = resize(g, 3.0);
  EXPECT_EQ(r, GrayImage(3, 3, 77));
}

TEST(Resize, CheckerboardMatchesReferenceSampler) {
  GrayImage g(2, 2);
  g.at(0, 0) = 0;
  g.at(1, 0) = 255;
  g.at(0, 1) = 255;
  g.at(1, 1) = 0;
  const GrayImage r = resize(g, 2.0);
  ASSERT_EQ(r.width(), 4);
  ASSERT_EQ(r.height(), 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_EQ(r.at(x, y), oracle::bilinear_at(g, 4, 4, x, y)) << x << "," << y;
  // Corners replicate the source corners.
  EXPECT_EQ(r.at(0, 0), 0);
  EXPECT_EQ(r.at(3, 0), 255);
}

TEST(Resize, RandomImagesMatchReferenceSampler) {
  std::mt19937 rng(9);
  for (double scale : {0.5, 0.75, 1.6, 2.5, 3.0}) {
    const GrayImage g = random_gray(rng, 11, 6);
    const GrayImage r = resize(g, scale);
    EXPECT_EQ(r.width(), std::lround(11 * scale));
    EXPECT_EQ(r.height(), std::lround(6 * scale));
    for (int y = 0; y < r.height(); ++y)
      for (int x = 0; x < r.width(); ++x)
        ASSERT_NEAR(r.at(x, y), oracle::bilinear_at(g, r.width(), r.height(), x, y), 1) << scale;
  }
}

TEST(Resize, DegenerateSize) {
  GrayImage g(3, 3, 0);
  try {
    resize(g, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateSize);
  }
  EXPECT_THROW(resize(g, 0.0), Error);
  EXPECT_THROW(resize(g, -1.0), Error);
}

TEST(Blur, KernelValidation) {
  for (int k : {0, 1, 2, 4, 6}) {
    try {
      gaussian_blur(GrayImage(5, 5), k, 1.0);
      FAIL() << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::BadKernel);
    }
  }
  EXPECT_THROW(gaussian_kernel(3, 0.0), Error);
}

TEST(Blur, ConstantAndSinglePixelUnchanged) {
  EXPECT_EQ(gaussian_blur(GrayImage(9, 6, 131), 5, 1.0), GrayImage(9, 6, 131));
  EXPECT_EQ(gaussian_blur(GrayImage(1, 1, 42), 7, 2.0), GrayImage(1, 1, 42));
}

TEST(Blur, ImpulseMatchesClosedFormKernel) {
  GrayImage g(7, 7, 0);
  g.at(3, 3) = 255;
  const GrayImage out = gaussian_blur(g, 3, 1.0);
  const auto k = oracle::gaussian_2d(3, 1.0);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      EXPECT_EQ(out.at(3 + dx, 3 + dy), static_cast<int>(std::floor(255 * k[dy + 1][dx + 1] + 0.5)));
  EXPECT_EQ(out.at(0, 0), 0);
  EXPECT_EQ(out.at(3, 5), 0);
}

TEST(Blur, StaysWithinInputRange) {
  std::mt19937 rng(13);
  for (int t = 0; t < 20; ++t) {
    GrayImage g = random_gray(rng, 16, 12);
    for (auto& p : g.pixels()) p = static_cast<std::uint8_t>(40 + p / 2);
    const auto [lo, hi] = std::minmax_element(g.pixels().begin(), g.pixels().end());
    const GrayImage out = gaussian_blur(g, 5, 1.3);
    for (auto v : out.pixels()) {
      ASSERT_GE(v, *lo);
      ASSERT_LE(v, *hi);
    }
  }
}

TEST(Otsu, ConstantImage) {
  const Threshold t = otsu_threshold(GrayImage(8, 8, 128));
  EXPECT_EQ(t.value, 128);
  for (auto v : t.binary.pixels()) EXPECT_EQ(v, 0);
}

TEST(Otsu, TwoLevelsSeparateExactly) {
  GrayImage g(10, 10, 200);
  for (int i = 0; i < 50; ++i) g.pixels()[static_cast<std::size_t>(i)] = 10;
  const Threshold t = otsu_threshold(g);
  EXPECT_GT(t.value, 10);
  EXPECT_LE(t.value, 200);
  // All thresholds in (10, 200] tie; the lowest wins.
  EXPECT_EQ(t.value, 11);
  std::size_t fg = 0;
  for (auto v : t.binary.pixels()) fg += v ? 1 : 0;
  EXPECT_EQ(fg, 50u);
  EXPECT_EQ(t.binary.at(0, 0), 1);
  EXPECT_EQ(t.binary.at(9, 9), 0);
}

TEST(Otsu, MatchesExhaustiveScan) {
  std::mt19937 rng(17);
  for (int t = 0; t < 60; ++t) {
    const GrayImage g = random_gray(rng, 32, 32);
    const int expected = oracle::otsu(g);
    const Threshold got = otsu_threshold(g);
    ASSERT_EQ(got.value, expected) << "image " << t;
    for (std::size_t i = 0; i < g.size(); ++i) ASSERT_EQ(got.binary.pixels()[i], g.pixels()[i] < expected ? 1 : 0);
  }
}

TEST(Otsu, BimodalTextLikeImage) {
  std::mt19937 rng(19);
  std::normal_distribution<double> ink(40, 10), paper(220, 10);
  GrayImage g(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      g.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround((x / 8 + y / 8) % 3 == 0 ? ink(rng) : paper(rng)), 0L, 255L));
  const int t = otsu_threshold(g).value;
  EXPECT_EQ(t, oracle::otsu(g));
  // Between the modes, three sigma clear of each.
  EXPECT_GT(t, 70);
  EXPECT_LT(t, 190);
}

TEST(Regions, EmptyImage) { EXPECT_TRUE(detect_regions(BinaryImage(20, 20), 1).empty()); }

TEST(Regions, TwoSquaresNoDilation) {
  BinaryImage img(70, 70);
  fill(img, 0, 0, 10, 10);
  fill(img, 50, 50, 10, 10);
  const auto r = detect_regions(img, 10, {false});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], box(0, 0, 10, 10));
  EXPECT_EQ(r[1], box(50, 50, 10, 10));
}

TEST(Regions, DiagonalPixelsAreOneComponent) {
  const BinaryImage img = from_rows({"#..", ".#.", "..."});
  const auto r = detect_regions(img, 1, {false});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], (Region{0, 0, 2, 2, 2}));
}

TEST(Regions, MinAreaDropsSpeckles) {
  BinaryImage img(30, 30);
  fill(img, 2, 2, 5, 5);
  img.at(20, 20) = 1;
  EXPECT_EQ(detect_regions(img, 10, {false}).size(), 1u);
  EXPECT_EQ(detect_regions(img, 1, {false}).size(), 2u);
  EXPECT_THROW(detect_regions(img, 0, {false}), Error);
}

TEST(Regions, DilationMergesGlyphsIntoLines) {
  BinaryImage img(60, 30);
  // Three "glyphs" 3 px apart on one line, a second line 12 px below.
  fill(img, 5, 5, 4, 6);
  fill(img, 12, 5, 4, 6);
  fill(img, 19, 5, 4, 6);
  fill(img, 5, 20, 4, 6);
  EXPECT_EQ(detect_regions(img, 1, {false}).size(), 4u);
  const auto merged = detect_regions(img, 1);
  ASSERT_EQ(merged.size(), 2u);
  // 9x3 element grows boxes by 4 px horizontally and 1 px vertically.
  EXPECT_EQ(merged[0].x, 1);
  EXPECT_EQ(merged[0].y, 4);
  EXPECT_EQ(merged[0].right(), 27);
  EXPECT_EQ(merged[0].bottom(), 12);
}

TEST(Regions, MatchLabelingOracleOnRandomImages) {
  std::mt19937 rng(23);
  std::bernoulli_distribution ink(0.35);
  for (int t = 0; t < 30; ++t) {
    BinaryImage img(25, 19);
    for (auto& p : img.pixels()) p = ink(rng);
    std::set<std::tuple<int, int, int, int, std::size_t>> got;
    for (const Region& r : detect_regions(img, 1, {false})) {
      ASSERT_GE(r.x, 0);
      ASSERT_LE(r.right(), img.width());
      ASSERT_LE(r.bottom(), img.height());
      got.insert({r.x, r.y, r.w, r.h, r.area});
    }
    ASSERT_EQ(got, oracle::component_boxes(img));
  }
}

TEST(Dilate, SeparableRectangle) {
  BinaryImage img(11, 7);
  img.at(5, 3) = 1;
  const BinaryImage d = dilate(img, 9, 3);
  std::size_t on = 0;
  for (auto v : d.pixels()) on += v;
  EXPECT_EQ(on, 27u);
  EXPECT_EQ(d.at(1, 2), 1);
  EXPECT_EQ(d.at(9, 4), 1);
  EXPECT_EQ(d.at(0, 3), 0);
  EXPECT_EQ(d.at(5, 1), 0);
}

TEST(ReadingOrder, LeftToRight) {
  const auto r = reading_order({box(100, 10, 20, 10), box(10, 10, 20, 10)});
  EXPECT_EQ(r[0].x, 10);
  EXPECT_EQ(r[1].x, 100);
}

TEST(ReadingOrder, TopToBottom) {
  const auto r = reading_order({box(0, 50, 20, 10), box(40, 10, 20, 10)});
  EXPECT_EQ(r[0].y, 10);
  EXPECT_EQ(r[1].y, 50);
}

TEST(ReadingOrder, SixtyPercentOverlapSharesLine) {
  // Heights 10 and 20; overlap of 6 px is 60% of the smaller height.
  const auto r = reading_order({box(50, 4, 10, 20), box(0, 0, 10, 10)});
  EXPECT_EQ(r[0].x, 0);
  EXPECT_EQ(r[1].x, 50);
  // 40% overlap: separate lines, the higher one first.
  const auto s = reading_order({box(0, 6, 10, 10), box(50, 0, 10, 10)});
  EXPECT_EQ(s[0].x, 50);
}

TEST(ReadingOrder, PermutationAndStable) {
  std::mt19937 rng(29);
  std::uniform_int_distribution<int> pos(0, 200), size(1, 30);
  for (int t = 0; t < 20; ++t) {
    std::vector<Region> in;
    for (int i = 0; i < 15; ++i) in.push_back(box(pos(rng), pos(rng), size(rng), size(rng)));
    const auto out = reading_order(in);
    ASSERT_EQ(out, reading_order(in));
    auto key = [](const Region& r) { return std::tuple(r.x, r.y, r.w, r.h); };
    std::multiset<std::tuple<int, int, int, int>> a, b;
    for (auto& r : in) a.insert(key(r));
    for (auto& r : out) b.insert(key(r));
    ASSERT_EQ(a, b);
  }
  // Identical boxes keep input order.
  std::vector<Region> same{{5, 5, 5, 5, 1}, {5, 5, 5, 5, 2}};
  EXPECT_EQ(reading_order(same)[0].area, 1u);
}

TEST(Preprocess, ChainAndDefaults) {
  RgbImage page(40, 20, Rgb{250, 250, 250});
  for (int y = 5; y < 15; ++y)
    for (int x = 10; x < 30; ++x) page.at(x, y) = {10, 10, 10};
  const Preprocessed p = preprocess(page);
  EXPECT_EQ(p.gray.at(0, 0), 250);
  EXPECT_EQ(p.binary.at(20, 10), 1);
  EXPECT_EQ(p.binary.at(0, 0), 0);
  const Preprocessed half = preprocess(page, {0.5, 0, 1.0});
  EXPECT_EQ(half.binary.width(), 20);
  EXPECT_EQ(half.blurred, half.gray);
}

TEST(Overlay, DrawsOutlines) {
  const RgbImage o = overlay_regions(GrayImage(10, 10, 200), {box(2, 2, 4, 4)});
  EXPECT_EQ(o.at(2, 2), (Rgb{255, 0, 0}));
  EXPECT_EQ(o.at(5, 4), (Rgb{255, 0, 0}));
  EXPECT_EQ(o.at(3, 3), (Rgb{200, 200, 200}));
}

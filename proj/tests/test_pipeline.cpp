///////////////////////////////////////////////////////////////////////
// File:        test_pipeline.cpp
// Description: File sniffing, rasterization contract, page joining and
//              end-to-end extraction with the atlas backend.
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
#include <array>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "docext/image_io.hpp"
#include "docext/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace docext;
using namespace docext::pipeline;
namespace fs = std::filesystem;

namespace {

std::vector<std::byte> bytes(std::string_view s) {
  std::vector<std::byte> b;
  for (char c : s) b.push_back(static_cast<std::byte>(c));
  b.resize(std::max<std::size_t>(b.size(), 12), std::byte{0});
  return b;
}

/// Recognizer that fails on pages containing a marker pixel value.
class FailingOnGray : public recognizer::Recognizer {
 public:
  std::string recognize(const GrayImage& page, const Region&, const recognizer::RecognizerConfig&) const override {
    if (page.width() == 77) throw Error(Errc::EngineFailed, "cannot read this page");
    return "ok";
  }
};

class Pipeline : public ::testing::Test {
 protected:
  Pipeline() : atlas_(synthetic::make_atlas()), engine_(atlas_) {
    atlas_path_ = synthetic::write_atlas(dir_.path());
    opts_.preprocess.blur_kernel = 0;
    opts_.rasterizer = FAKE_RASTERIZER_PATH;
  }

  fs::path path(const std::string& name) const { return dir_.path() / name; }

  RgbImage page_image(const std::string& text, int w = 400, int h = 120) const {
    return to_rgb(synthetic::render_page_at(atlas_, text, w, h, 11, 7));
  }

  process::TempDir dir_{"docext-test"};
  recognizer::GlyphAtlas atlas_;
  recognizer::AtlasRecognizer engine_;
  fs::path atlas_path_;
  PipelineOptions opts_;
};

}  // namespace

TEST(FileType, Signatures) {
  EXPECT_EQ(detect_file_type(bytes("%PDF-1.4\n%abc")), InputKind::Pdf);
  EXPECT_EQ(detect_file_type(bytes("\x89PNG\r\n\x1a\n")), InputKind::Png);
  EXPECT_EQ(detect_file_type(bytes("\xFF\xD8\xFF\xE0")), InputKind::Jpeg);
  EXPECT_EQ(detect_file_type(bytes(std::string("II*\0", 4))), InputKind::Tiff);
  EXPECT_EQ(detect_file_type(bytes(std::string("MM\0*", 4))), InputKind::Tiff);
  EXPECT_EQ(detect_file_type(bytes("BM")), InputKind::Bmp);
}

TEST(FileType, UnknownAndShort) {
  auto expect_unknown = [](std::vector<std::byte> b) {
    try {
      detect_file_type(b);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::UnknownType);
    }
  };
  expect_unknown(bytes("hello, world"));
  std::vector<std::byte> short_pdf;
  for (char c : std::string("%PDF-1.4")) short_pdf.push_back(static_cast<std::byte>(c));
  expect_unknown(short_pdf);
  std::mt19937 rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::byte> b(12);
    for (auto& x : b) x = static_cast<std::byte>(rng() % 256);
    b[0] = std::byte{'x'};
    expect_unknown(b);
  }
}

TEST(FileType, IgnoresExtension) {
  process::TempDir dir("docext-test");
  const fs::path p = dir.path() / "looks_like.pdf";
  io::write_png(p, GrayImage(3, 3, 9));
  EXPECT_EQ(detect_file_type(p), InputKind::Png);
}

TEST(JoinPages, Separator) {
  EXPECT_EQ(join_pages({"a", "b"}), "a\fb");
  EXPECT_EQ(join_pages({"x"}), "x");
  EXPECT_EQ(join_pages({}), "");
  EXPECT_EQ(join_pages({"", ""}), "\f");
}

TEST(JoinPages, FormFeedCountInvariant) {
  const std::vector<std::string> pages{"a\fb", "\f\fc", "d\r\ne\rf"};
  const std::string joined = join_pages(pages);
  EXPECT_EQ(std::count(joined.begin(), joined.end(), '\f'), 2);
  EXPECT_EQ(joined, "ab\fc\fd\ne\nf");
}

TEST_F(Pipeline, SinglePagePng) {
  const std::string src = "கா மு ரூ\nකා ලි 2024";
  io::write_png(path("one.png"), page_image(src));
  const auto res = extract_text(path("one.png"), engine_, opts_);
  EXPECT_EQ(res.page_count, 1u);
  EXPECT_EQ(res.joined, src);
  EXPECT_EQ(res.source, path("one.png"));
}

TEST_F(Pipeline, EmptyPageGivesEmptyText) {
  io::write_png(path("blank.png"), GrayImage(200, 100, 255));
  const auto res = extract_text(path("blank.png"), engine_, opts_);
  EXPECT_EQ(res.joined, "");
  EXPECT_EQ(res.page_texts, std::vector<std::string>{""});
}

TEST_F(Pipeline, MultiPageTiff) {
  const std::vector<std::string> src{"அ ஆ இ", "ක ග ච\nA B C"};
  std::vector<GrayImage> pages;
  for (const auto& s : src) pages.push_back(synthetic::render_page_at(atlas_, s, 300, 90, 20, 20));
  io::write_tiff(path("two.tif"), pages);
  const auto res = extract_text(path("two.tif"), engine_, opts_);
  EXPECT_EQ(res.page_texts, src);
  EXPECT_EQ(res.joined, src[0] + "\f" + src[1]);
}

TEST_F(Pipeline, BmpAndJpeg) {
  const std::string src = "ම ය ර 7";
  io::write_bmp(path("page.bmp"), page_image(src));
  EXPECT_EQ(extract_text(path("page.bmp"), engine_, opts_).joined, src);
  io::write_jpeg(path("page.jpg"), page_image(src), 100);
  EXPECT_EQ(extract_text(path("page.jpg"), engine_, opts_).joined, src);
}

TEST_F(Pipeline, PagesDirectorySortedByName) {
  fs::create_directories(path("pages"));
  io::write_png(path("pages/p10.png"), page_image("c"));
  io::write_png(path("pages/p02.png"), page_image("b"));
  io::write_png(path("pages/p01.png"), page_image("a"));
  std::ofstream(path("pages/notes.txt")) << "not an image";
  const auto res = extract_text(path("pages"), engine_, opts_);
  EXPECT_EQ(res.page_texts, (std::vector<std::string>{"a", "b", "c"}));
  fs::create_directories(path("empty"));
  try {
    extract_text(path("empty"), engine_, opts_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroPages);
  }
}

TEST_F(Pipeline, PdfThroughRasterizer) {
  const std::vector<std::string> src{"page one", "page two", "page three"};
  synthetic::write_fake_pdf(path("doc.pdf"), src, atlas_path_, 2.0, 1.0);
  PipelineOptions o = opts_;
  o.dpi = 150;
  const auto res = extract_text(path("doc.pdf"), engine_, o);
  EXPECT_EQ(res.page_count, 3u);
  EXPECT_EQ(res.page_texts, src);
}

TEST_F(Pipeline, PdfWithTenPagesUsesPaddedNames) {
  std::vector<std::string> src;
  for (int i = 1; i <= 11; ++i) src.push_back("p " + std::to_string(i));
  synthetic::write_fake_pdf(path("long.pdf"), src, atlas_path_, 1.0, 0.5);
  PipelineOptions o = opts_;
  o.dpi = 100;
  o.parallelism = 3;
  EXPECT_EQ(extract_text(path("long.pdf"), engine_, o).page_texts, src);
}

TEST_F(Pipeline, RasterizeUsLetterAt300Dpi) {
  synthetic::write_fake_pdf(path("letter.pdf"), {"a"}, atlas_path_);
  const auto pages = rasterize_pdf(path("letter.pdf"), 300, FAKE_RASTERIZER_PATH);
  ASSERT_EQ(pages.size(), 1u);
  EXPECT_NEAR(pages[0].width(), 2550, 2);
  EXPECT_NEAR(pages[0].height(), 3300, 2);
}

TEST_F(Pipeline, RasterizerErrors) {
  synthetic::write_fake_pdf(path("ok.pdf"), {"a"}, atlas_path_, 1, 1);
  try {
    rasterize_pdf(path("ok.pdf"), 72, "/nonexistent/pdftoppm");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RasterizerUnavailable);
  }

  std::ofstream(path("locked.pdf")) << "%PDF-1.7\n/Encrypt 5 0 R\n";
  try {
    extract_text(path("locked.pdf"), engine_, opts_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RasterizerFailed);
    EXPECT_NE(std::string(e.what()).find("Incorrect password"), std::string::npos);
  }

  std::ofstream(path("corrupt.pdf")) << "%PDF-1.4\n\x01\x02 garbage";
  try {
    extract_text(path("corrupt.pdf"), engine_, opts_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RasterizerFailed);
  }

  synthetic::write_fake_pdf(path("zero.pdf"), {}, atlas_path_, 1, 1);
  try {
    extract_text(path("zero.pdf"), engine_, opts_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroPages);
  }
}

TEST_F(Pipeline, UnknownTypeAndMissingFile) {
  std::ofstream(path("text.txt")) << "just some plain text here";
  try {
    extract_text(path("text.txt"), engine_, opts_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownType);
  }
  try {
    extract_text(path("missing.pdf"), engine_, opts_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("missing.pdf"), std::string::npos);
  }
}

TEST_F(Pipeline, PageErrorsNameThePage) {
  std::vector<GrayImage> pages{GrayImage(50, 20, 255), GrayImage(77, 20, 255), GrayImage(50, 20, 255)};
  for (auto& p : pages) p.at(3, 3) = 0;
  io::write_tiff(path("bad.tif"), pages);
  FailingOnGray engine;
  try {
    extract_text(path("bad.tif"), engine, opts_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EngineFailed);
    EXPECT_EQ(e.page(), 1u);
    EXPECT_NE(std::string(e.what()).find("page 2"), std::string::npos);
  }
}

TEST_F(Pipeline, PerRegionModeReadsRegionsInOrder) {
  // Two text blocks far apart; the right one is higher on the page.
  GrayImage page(500, 200, 255);
  auto blit = [&](const std::string& text, int x, int y) {
    const GrayImage t = synthetic::render_page(atlas_, text);
    for (int yy = 0; yy < t.height(); ++yy)
      for (int xx = 0; xx < t.width(); ++xx) page.at(x + xx, y + yy) = std::min(page.at(x + xx, y + yy), t.at(xx, yy));
  };
  blit("second", 10, 100);
  blit("first", 300, 10);
  io::write_png(path("regions.png"), page);
  PipelineOptions o = opts_;
  o.per_region = true;
  const auto res = extract_text(path("regions.png"), engine_, o);
  EXPECT_EQ(res.joined, "first\nsecond");
}

TEST_F(Pipeline, DeterministicAcrossParallelism) {
  std::mt19937 rng(41);
  std::vector<GrayImage> pages;
  std::vector<std::string> src;
  for (int i = 0; i < 6; ++i) {
    src.push_back(synthetic::random_text(rng, 3, 5));
    pages.push_back(synthetic::render_page(atlas_, src.back()));
  }
  io::write_tiff(path("six.tif"), pages);
  std::vector<std::string> outputs;
  for (unsigned cap : {1u, 2u, 8u}) {
    PipelineOptions o = opts_;
    o.parallelism = cap;
    outputs.push_back(extract_text(path("six.tif"), engine_, o).joined);
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  EXPECT_EQ(outputs[0], outputs[2]);
  EXPECT_EQ(outputs[0], join_pages(src));
}

TEST_F(Pipeline, DebugImages) {
  io::write_png(path("dbg.png"), page_image("a b"));
  PipelineOptions o = opts_;
  o.debug_images = path("debug");
  extract_text(path("dbg.png"), engine_, o);
  EXPECT_TRUE(fs::exists(path("debug/dbg-p0001-gray.png")));
  EXPECT_TRUE(fs::exists(path("debug/dbg-p0001-threshold.png")));
  EXPECT_TRUE(fs::exists(path("debug/dbg-p0001-contours.png")));
}

TEST_F(Pipeline, BatchContinuesPastFailures) {
  io::write_png(path("good.png"), page_image("ok"));
  std::ofstream(path("bad.bin")) << "neither image nor pdf";
  const auto items = extract_batch({path("good.png"), path("bad.bin"), path("good.png")}, engine_, opts_);
  ASSERT_EQ(items.size(), 3u);
  ASSERT_TRUE(items[0].result);
  EXPECT_EQ(items[0].result->joined, "ok");
  EXPECT_FALSE(items[1].result);
  EXPECT_NE(items[1].error.find("UnknownType"), std::string::npos);
  ASSERT_TRUE(items[2].result);
}

TEST_F(Pipeline, WriteTextIsUtf8Verbatim) {
  write_text(path("out/x.txt"), "அ\nb");
  std::ifstream in(path("out/x.txt"), std::ios::binary);
  std::string s((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(s, "அ\nb");
}

///////////////////////////////////////////////////////////////////////
// File:        pipeline.hpp
// Description: Document text extraction: type detection, PDF
//              rasterization, per-page preprocessing and recognition,
//              and page joining.
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
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "docext/error.hpp"
#include "docext/filetype.hpp"
#include "docext/image.hpp"
#include "docext/image_io.hpp"
#include "docext/imgproc.hpp"
#include "docext/parallel.hpp"
#include "docext/process.hpp"
#include "docext/recognizer.hpp"

namespace docext::pipeline {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

inline constexpr char kPageSeparator = '\f';

struct PipelineOptions {
  imgproc::PreprocessOptions preprocess;
  /// Recognize region crops in reading order instead of whole pages.
  bool per_region = false;
  std::size_t min_area = 10;
  imgproc::Dilation dilation;
  int dpi = 300;
  std::string rasterizer = "pdftoppm";
  /// Worker cap for pages; 0 = number of logical CPUs.
  unsigned parallelism = 0;
  /// When set, gray/threshold/contour images of every page are written here.
  std::optional<fs::path> debug_images;
  recognizer::RecognizerConfig recognizer;
};

/// Per-stage durations; stages that run per page are summed over pages.
struct StageTimings {
  Clock::duration rasterize{};
  Clock::duration load{};
  Clock::duration preprocess{};
  Clock::duration recognize{};
};

struct ExtractionResult {
  fs::path source;
  std::vector<std::string> page_texts;
  std::string joined;
  std::size_t page_count = 0;
  StageTimings timing;
};

/// Page text as it is stored: page separators removed, CRLF/CR folded to LF.
inline std::string clean_page_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == kPageSeparator) continue;
    if (c == '\r') {
      out += '\n';
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      continue;
    }
    out += c;
  }
  return out;
}

/// Pages joined by a single form feed; no trailing separator.
inline std::string join_pages(const std::vector<std::string>& pages) {
  std::string out;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (i) out += kPageSeparator;
    out += clean_page_text(pages[i]);
  }
  return out;
}

namespace detail {

/// Page number in "<prefix>-<digits>.<ext>", or nullopt.
inline std::optional<long> page_number(const fs::path& file, const std::string& prefix) {
  const std::string name = file.filename().string();
  const std::string head = prefix + "-";
  if (!name.starts_with(head)) return std::nullopt;
  const std::string stem = file.stem().string();
  if (stem.size() <= head.size()) return std::nullopt;
  const std::string digits = stem.substr(head.size());
  long n = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || n < 1) return std::nullopt;
  const std::string ext = file.extension().string();
  if (ext != ".png" && ext != ".ppm" && ext != ".pgm" && ext != ".pbm") return std::nullopt;
  return n;
}

inline bool is_netpbm(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".ppm" || ext == ".pgm" || ext == ".pbm";
}

}  // namespace detail

/// Runs `<rasterizer> -r <dpi> <pdf> <out_dir>/page` and returns the page
/// files it produced (`page-<n>.png`, or netpbm) in page order.
inline std::vector<fs::path> rasterize_pdf_files(const fs::path& pdf, int dpi, const std::string& rasterizer,
                                                 const fs::path& out_dir) {
  if (dpi < 1) throw Error(Errc::RasterizerFailed, "dpi must be positive");
  const std::string prefix = "page";
  process::Result result;
  const auto status =
      process::run({rasterizer, "-r", std::to_string(dpi), pdf.string(), (out_dir / prefix).string()}, result);
  if (status == process::SpawnStatus::NotFound)
    throw Error(Errc::RasterizerUnavailable, "cannot start '" + rasterizer + "': " + result.output);
  if (status != process::SpawnStatus::Ok)
    throw Error(Errc::RasterizerUnavailable, "spawning '" + rasterizer + "' failed: " + result.output);
  if (result.exit_code != 0)
    throw Error(Errc::RasterizerFailed, pdf.string() + ": '" + rasterizer + "' exited with status " +
                                            std::to_string(result.exit_code) + ": " + result.output);

  std::vector<std::pair<long, fs::path>> pages;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (auto n = detail::page_number(entry.path(), prefix)) pages.emplace_back(*n, entry.path());
  }
  if (pages.empty()) throw Error(Errc::ZeroPages, pdf.string() + ": rasterizer produced no pages");
  std::sort(pages.begin(), pages.end());
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (pages[i].first != static_cast<long>(i + 1))
      throw Error(Errc::RasterizerFailed, pdf.string() + ": page " + std::to_string(i + 1) + " missing from output")
          .with_page(i);
    out.push_back(pages[i].second);
  }
  return out;
}

inline RgbImage read_page_file(const fs::path& file) {
  if (detail::is_netpbm(file)) return io::decode_netpbm(io::read_bytes(file), file.string());
  auto pages = io::read_pages(file);
  return std::move(pages.front());
}

/// Rasterizes every page of `pdf` at `dpi`, in document order.
inline std::vector<RgbImage> rasterize_pdf(const fs::path& pdf, int dpi, const std::string& rasterizer = "pdftoppm") {
  process::TempDir scratch("docext-pdf");
  std::vector<RgbImage> pages;
  const auto files = rasterize_pdf_files(pdf, dpi, rasterizer, scratch.path());
  for (std::size_t i = 0; i < files.size(); ++i) {
    try {
      pages.push_back(read_page_file(files[i]));
    } catch (const Error& e) {
      throw Error(Errc::RasterizerFailed, "page " + std::to_string(i + 1) + ": " + e.detail()).with_page(i);
    }
  }
  return pages;
}

/// Page images of a directory of pre-rasterized pages, sorted by file name.
/// Files whose content is not a known raster are skipped.
inline std::vector<fs::path> list_page_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::Io, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (detail::is_netpbm(entry.path())) {
      files.push_back(entry.path());
      continue;
    }
    try {
      if (detect_file_type(entry.path()) != InputKind::Pdf) files.push_back(entry.path());
    } catch (const Error&) {
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (files.empty()) throw Error(Errc::ZeroPages, dir.string() + ": no page images");
  return files;
}

/// Lazily decoded pages: file-backed pages load on demand so a long PDF
/// never has every raster in memory at once.
class PageSource {
 public:
  static PageSource from_files(std::vector<fs::path> files) {
    PageSource s;
    s.files_ = std::move(files);
    return s;
  }
  static PageSource from_images(std::vector<RgbImage> images) {
    PageSource s;
    s.images_ = std::move(images);
    return s;
  }

  std::size_t size() const noexcept { return files_.empty() ? images_.size() : files_.size(); }

  RgbImage load(std::size_t i) const { return files_.empty() ? images_[i] : read_page_file(files_[i]); }

 private:
  std::vector<fs::path> files_;
  std::vector<RgbImage> images_;
};

namespace detail {

inline std::string page_tag(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%04zu", i + 1);
  return buf;
}

inline void dump_debug(const fs::path& dir, const std::string& stem, std::size_t page,
                       const imgproc::Preprocessed& pre, const std::vector<Region>& regions) {
  fs::create_directories(dir);
  const std::string base = stem + "-" + page_tag(page);
  io::write_png(dir / (base + "-gray.png"), pre.gray);
  io::write_png(dir / (base + "-threshold.png"), pre.binary);
  io::write_png(dir / (base + "-contours.png"), imgproc::overlay_regions(pre.gray, regions));
}

}  // namespace detail

/// Preprocesses and recognizes one page image.
inline std::string process_page(const RgbImage& page, const recognizer::Recognizer& engine,
                                 const PipelineOptions& opts, StageTimings& timing,
                                 const std::string& debug_stem = {}, std::size_t page_index = 0) {
  auto t0 = Clock::now();
  const imgproc::Preprocessed pre = imgproc::preprocess(page, opts.preprocess);
  const GrayImage clean = to_gray(pre.binary);
  std::vector<Region> regions;
  if (opts.per_region || opts.debug_images)
    regions = imgproc::reading_order(imgproc::detect_regions(pre.binary, opts.min_area, opts.dilation));
  if (opts.debug_images) detail::dump_debug(*opts.debug_images, debug_stem, page_index, pre, regions);
  auto t1 = Clock::now();
  timing.preprocess += t1 - t0;

  std::string text;
  if (opts.per_region) {
    for (const Region& r : regions) {
      std::string piece = engine.recognize(clean, r, opts.recognizer);
      if (piece.empty()) continue;
      if (!text.empty()) text += '\n';
      text += piece;
    }
  } else {
    text = engine.recognize_page(clean, opts.recognizer);
  }
  timing.recognize += Clock::now() - t1;
  return clean_page_text(text);
}

/// Runs every page of `pages` and assembles the result by page index. Any
/// page failure aborts the document; the error names the 1-based page.
inline ExtractionResult extract_pages(const fs::path& source, const PageSource& pages,
                                      const recognizer::Recognizer& engine, const PipelineOptions& opts) {
  ExtractionResult res;
  res.source = source;
  res.page_count = pages.size();
  res.page_texts.resize(pages.size());
  std::vector<StageTimings> timings(pages.size());
  const std::string stem = source.stem().empty() ? source.filename().string() : source.stem().string();

  parallel_for(pages.size(), opts.parallelism, [&](std::size_t i) {
    try {
      auto t0 = Clock::now();
      const RgbImage page = pages.load(i);
      timings[i].load += Clock::now() - t0;
      res.page_texts[i] = process_page(page, engine, opts, timings[i], stem, i);
    } catch (const Error& e) {
      throw Error(e.code(), source.string() + ": page " + std::to_string(i + 1) + ": " + e.detail()).with_page(i);
    }
  });
  for (const auto& t : timings) {
    res.timing.load += t.load;
    res.timing.preprocess += t.preprocess;
    res.timing.recognize += t.recognize;
  }
  res.joined = join_pages(res.page_texts);
  return res;
}

/// Extracts the text of one document. PDFs go through the external
/// rasterizer; TIFFs contribute one page per directory; other rasters are a
/// single page. The file type comes from content, never the extension.
inline ExtractionResult extract_text(const fs::path& path, const recognizer::Recognizer& engine,
                                     const PipelineOptions& opts = {}) {
  if (!fs::exists(path)) throw Error(Errc::Io, "no such file: " + path.string());
  if (fs::is_directory(path)) return extract_pages(path, PageSource::from_files(list_page_images(path)), engine, opts);

  const InputKind kind = detect_file_type(path);
  auto t0 = Clock::now();
  if (kind == InputKind::Pdf) {
    process::TempDir scratch("docext-pdf");
    auto files = rasterize_pdf_files(path, opts.dpi, opts.rasterizer, scratch.path());
    const auto raster = Clock::now() - t0;
    ExtractionResult res = extract_pages(path, PageSource::from_files(std::move(files)), engine, opts);
    res.timing.rasterize = raster;
    return res;
  }
  std::vector<RgbImage> images;
  try {
    images = io::read_pages(path);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
  const auto load = Clock::now() - t0;
  ExtractionResult res = extract_pages(path, PageSource::from_images(std::move(images)), engine, opts);
  res.timing.load += load;
  return res;
}

/// Writes UTF-8 text with Unix line endings (already normalized).
inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

struct BatchItem {
  fs::path source;
  std::optional<ExtractionResult> result;
  std::string error;  // set when result is empty
};

/// Extracts many documents; failures are recorded per document and do not
/// stop the batch. Items come back in input order. With more than one
/// document the documents run in parallel and pages of each sequentially.
inline std::vector<BatchItem> extract_batch(const std::vector<fs::path>& inputs, const recognizer::Recognizer& engine,
                                            const PipelineOptions& opts) {
  std::vector<BatchItem> items(inputs.size());
  PipelineOptions doc_opts = opts;
  if (inputs.size() > 1) doc_opts.parallelism = 1;
  parallel_for(inputs.size(), inputs.size() > 1 ? opts.parallelism : 1, [&](std::size_t i) {
    items[i].source = inputs[i];
    try {
      items[i].result = extract_text(inputs[i], engine, doc_opts);
    } catch (const std::exception& e) {
      items[i].error = e.what();
    }
  });
  return items;
}

}  // namespace docext::pipeline

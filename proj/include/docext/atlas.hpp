///////////////////////////////////////////////////////////////////////
// File:        atlas.hpp
// Description: Deterministic glyph-atlas recognizer: exact bitmap
//              template matching, plus a renderer producing pages it
//              reads back verbatim. Used to test the pipeline offline.
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
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "docext/error.hpp"
#include "docext/image.hpp"
#include "docext/imgproc.hpp"
#include "docext/recognizer.hpp"

namespace docext::recognizer {

inline constexpr std::string_view kReplacementChar = "\xEF\xBF\xBD";  // U+FFFD

struct Glyph {
  std::string text;
  BinaryImage pattern;  // tight, single 8-connected component
};

namespace detail {

/// Row-major bytes with the dimensions prepended; used as a map key.
inline std::string pattern_key(const BinaryImage& p) {
  std::string k = std::to_string(p.width()) + "x" + std::to_string(p.height()) + ":";
  for (std::uint8_t v : p.pixels()) k += v ? '1' : '0';
  return k;
}

inline BinaryImage tight(const BinaryImage& img) {
  int minx = img.width(), miny = img.height(), maxx = -1, maxy = -1;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img.at(x, y)) {
        minx = std::min(minx, x);
        maxx = std::max(maxx, x);
        miny = std::min(miny, y);
        maxy = std::max(maxy, y);
      }
  if (maxx < 0) return {};
  return crop(img, Region{minx, miny, maxx - minx + 1, maxy - miny + 1, 0});
}

}  // namespace detail

/// Exact-match glyph table. Patterns are stored tight to their bounding box,
/// must be non-empty, unique, and form one 8-connected component so that
/// component extraction on a rendered page recovers them intact.
class GlyphAtlas {
 public:
  explicit GlyphAtlas(int gap_threshold = 4) : gap_threshold_(gap_threshold) {
    if (gap_threshold < 1) throw Error(Errc::BadImage, "gap threshold must be >= 1");
  }

  void add(std::string text, const BinaryImage& pattern) {
    if (text.empty()) throw Error(Errc::BadImage, "glyph text must be non-empty");
    BinaryImage p = detail::tight(pattern);
    if (p.empty()) throw Error(Errc::BadImage, "glyph '" + text + "' has an empty pattern");
    if (imgproc::connected_components(p).size() != 1)
      throw Error(Errc::BadImage, "glyph '" + text + "' is not a single connected component");
    const std::string key = detail::pattern_key(p);
    if (by_pattern_.count(key)) throw Error(Errc::BadImage, "duplicate pattern for glyph '" + text + "'");
    if (by_text_.count(text)) throw Error(Errc::BadImage, "duplicate glyph text '" + text + "'");
    by_pattern_[key] = glyphs_.size();
    by_text_[text] = glyphs_.size();
    glyphs_.push_back({std::move(text), std::move(p)});
  }

  /// Pattern from rows of '#' (ink) and any other character (background).
  void add(std::string text, const std::vector<std::string>& rows) {
    const int h = static_cast<int>(rows.size());
    int w = 0;
    for (const auto& r : rows) w = std::max(w, static_cast<int>(r.size()));
    BinaryImage p(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < static_cast<int>(rows[y].size()); ++x) p.at(x, y) = rows[y][x] == '#';
    add(std::move(text), p);
  }

  std::optional<std::string_view> lookup(const BinaryImage& tight_pattern) const {
    auto it = by_pattern_.find(detail::pattern_key(tight_pattern));
    if (it == by_pattern_.end()) return std::nullopt;
    return glyphs_[it->second].text;
  }

  const Glyph* find_text(std::string_view text) const {
    auto it = by_text_.find(std::string(text));
    return it == by_text_.end() ? nullptr : &glyphs_[it->second];
  }

  const std::vector<Glyph>& glyphs() const noexcept { return glyphs_; }
  int gap_threshold() const noexcept { return gap_threshold_; }

  int max_height() const noexcept {
    int h = 0;
    for (const auto& g : glyphs_) h = std::max(h, g.pattern.height());
    return h;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["gap_threshold"] = gap_threshold_;
    j["glyphs"] = nlohmann::json::array();
    for (const auto& g : glyphs_) {
      nlohmann::json rows = nlohmann::json::array();
      for (int y = 0; y < g.pattern.height(); ++y) {
        std::string r;
        for (int x = 0; x < g.pattern.width(); ++x) r += g.pattern.at(x, y) ? '#' : '.';
        rows.push_back(r);
      }
      j["glyphs"].push_back({{"text", g.text}, {"rows", rows}});
    }
    return j;
  }

  /// {"gap_threshold": n, "glyphs": [{"text": "...", "rows": ["#..", ...]}]}
  static GlyphAtlas from_json(const nlohmann::json& j) {
    try {
      GlyphAtlas atlas(j.value("gap_threshold", 4));
      for (const auto& g : j.at("glyphs")) atlas.add(g.at("text").get<std::string>(), g.at("rows").get<std::vector<std::string>>());
      return atlas;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::BadImage, std::string("malformed glyph atlas: ") + e.what());
    }
  }

  static GlyphAtlas load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open glyph atlas " + path.string());
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::BadImage, path.string() + ": " + e.what());
    }
  }

 private:
  int gap_threshold_;
  std::vector<Glyph> glyphs_;
  std::map<std::string, std::size_t> by_pattern_;
  std::map<std::string, std::size_t> by_text_;
};

/// Reads a binary raster glyph by glyph. Components are grouped into lines
/// with the same overlap rule as reading order, read left to right, and
/// matched exactly against the atlas (unknown shapes give U+FFFD). A
/// horizontal gap of at least the atlas gap threshold between neighbours
/// becomes one space; lines are joined with '\n'.
inline std::string atlas_recognize(const BinaryImage& img, const GlyphAtlas& atlas) {
  const auto comps = imgproc::connected_components(img);
  std::vector<Region> boxes;
  boxes.reserve(comps.size());
  for (const auto& c : comps) boxes.push_back(c.box);

  std::string out;
  bool first_line = true;
  for (const auto& line : imgproc::group_lines(boxes)) {
    if (!first_line) out += '\n';
    first_line = false;
    const Region* prev = nullptr;
    for (std::size_t i : line) {
      const Region& box = boxes[i];
      if (prev && box.x - prev->right() >= atlas.gap_threshold()) out += ' ';
      // Only this component's pixels: neighbours may intrude into the box.
      BinaryImage pattern(box.w, box.h);
      for (auto [x, y] : comps[i].pixels) pattern.at(x - box.x, y - box.y) = 1;
      if (auto text = atlas.lookup(pattern)) {
        out += *text;
      } else {
        out += kReplacementChar;
      }
      prev = &box;
    }
  }
  return out;
}

struct RenderOptions {
  int letter_spacing = 2;  // blank columns between glyphs of a word
  int word_spacing = 6;    // blank columns for a space; must reach the gap threshold
  int line_spacing = 6;    // blank rows between lines
  int margin = 8;
};

/// Splits `text` into atlas glyph texts by greedy longest match; ' ' and
/// '\n' are passed through as themselves.
inline std::vector<std::string> atlas_segment(const GlyphAtlas& atlas, std::string_view text) {
  std::size_t longest = 1;
  for (const auto& g : atlas.glyphs()) longest = std::max(longest, g.text.size());
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == ' ' || text[pos] == '\n') {
      out.emplace_back(1, text[pos++]);
      continue;
    }
    std::size_t len = std::min(longest, text.size() - pos);
    for (; len > 0; --len)
      if (atlas.find_text(text.substr(pos, len))) break;
    if (len == 0) throw Error(Errc::BadImage, "text at byte " + std::to_string(pos) + " has no atlas glyph");
    out.emplace_back(text.substr(pos, len));
    pos += len;
  }
  return out;
}

/// Renders text with the atlas patterns, glyphs bottom-aligned on a common
/// baseline. The result reads back identically through atlas_recognize
/// provided the text has no leading, trailing or doubled spaces.
inline BinaryImage render_text(const GlyphAtlas& atlas, std::string_view text, const RenderOptions& opt = {}) {
  if (opt.word_spacing < atlas.gap_threshold() || opt.letter_spacing >= atlas.gap_threshold() ||
      opt.letter_spacing < 1 || opt.line_spacing < 1)
    throw Error(Errc::BadImage, "render spacing incompatible with the atlas gap threshold");

  std::vector<std::vector<std::string>> lines(1);
  for (auto& piece : atlas_segment(atlas, text)) {
    if (piece == "\n") {
      lines.emplace_back();
    } else {
      lines.back().push_back(std::move(piece));
    }
  }

  const int line_h = std::max(1, atlas.max_height());
  int width = 0;
  for (const auto& line : lines) {
    int x = 0;
    bool prev_glyph = false;
    for (const auto& p : line) {
      if (p == " ") {
        x += opt.word_spacing;
        prev_glyph = false;
      } else {
        if (prev_glyph) x += opt.letter_spacing;
        x += atlas.find_text(p)->pattern.width();
        prev_glyph = true;
      }
    }
    width = std::max(width, x);
  }
  const int n = static_cast<int>(lines.size());
  BinaryImage page(width + 2 * opt.margin, n * line_h + (n - 1) * opt.line_spacing + 2 * opt.margin);

  for (int li = 0; li < n; ++li) {
    const int baseline = opt.margin + li * (line_h + opt.line_spacing) + line_h;
    int x = opt.margin;
    bool prev_glyph = false;
    for (const auto& p : lines[static_cast<std::size_t>(li)]) {
      if (p == " ") {
        x += opt.word_spacing;
        prev_glyph = false;
        continue;
      }
      if (prev_glyph) x += opt.letter_spacing;
      const BinaryImage& pat = atlas.find_text(p)->pattern;
      const int top = baseline - pat.height();
      for (int y = 0; y < pat.height(); ++y)
        for (int px = 0; px < pat.width(); ++px)
          if (pat.at(px, y)) page.at(x + px, top + y) = 1;
      x += pat.width();
      prev_glyph = true;
    }
  }
  return page;
}

/// Recognizer backend over a GlyphAtlas. The region is binarized at mid
/// gray (dark = ink) before matching.
class AtlasRecognizer final : public Recognizer {
 public:
  explicit AtlasRecognizer(GlyphAtlas atlas) : atlas_(std::move(atlas)) {}

  const GlyphAtlas& atlas() const noexcept { return atlas_; }

  std::string recognize(const GrayImage& page, const Region& region, const RecognizerConfig&) const override {
    check_region(page, region);
    if (is_blank(page, region)) return {};
    BinaryImage bin(region.w, region.h);
    for (int y = 0; y < region.h; ++y)
      for (int x = 0; x < region.w; ++x) bin.at(x, y) = page.at(region.x + x, region.y + y) < 128 ? 1 : 0;
    return unicode::trim(atlas_recognize(bin, atlas_));
  }

 private:
  GlyphAtlas atlas_;
};

}  // namespace docext::recognizer

///////////////////////////////////////////////////////////////////////
// File:        groundtruth.hpp
// Description: Tesseract-style box files: parsing, canonical
//              serialization and geometric validation against page sizes.
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
#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "docext/error.hpp"

namespace docext::groundtruth {

/// One box line. Coordinates use the box format's bottom-left origin:
/// `bottom` < `top` counts upwards from the page's lower edge.
struct BoxEntry {
  std::string glyph;
  int left = 0, bottom = 0, right = 0, top = 0;
  int page = 0;

  long long area() const noexcept {
    return static_cast<long long>(right - left) * static_cast<long long>(top - bottom);
  }

  friend bool operator==(const BoxEntry&, const BoxEntry&) = default;
};

namespace detail {

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty() || s.front() == '+') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] inline void bad_line(std::size_t line_no, const std::string& why) {
  throw Error(Errc::BadLine, "line " + std::to_string(line_no) + ": " + why).with_line(line_no);
}

}  // namespace detail

/// Parses one line (no terminator) into an entry. The last five
/// space-separated fields are left, bottom, right, top and page; the prefix
/// before them is the glyph. A glyph is either free of spaces or exactly one
/// space character (written as a leading space).
inline BoxEntry parse_box_line(std::string_view line, std::size_t line_no) {
  std::array<std::string_view, 5> fields;
  std::string_view rest = line;
  for (int f = 4; f >= 0; --f) {
    const std::size_t sp = rest.rfind(' ');
    if (sp == std::string_view::npos) detail::bad_line(line_no, "expected glyph and 5 fields");
    fields[static_cast<std::size_t>(f)] = rest.substr(sp + 1);
    rest = rest.substr(0, sp);
  }
  const std::string_view glyph = rest;
  if (glyph.empty()) detail::bad_line(line_no, "empty glyph");
  if (glyph != " " && glyph.find(' ') != std::string_view::npos) detail::bad_line(line_no, "glyph contains a space");

  BoxEntry e;
  e.glyph = std::string(glyph);
  int* dst[5] = {&e.left, &e.bottom, &e.right, &e.top, &e.page};
  for (std::size_t f = 0; f < 5; ++f)
    if (!detail::parse_int(fields[f], *dst[f]))
      detail::bad_line(line_no, "field " + std::to_string(f + 2) + " is not an integer: '" + std::string(fields[f]) + "'");
  if (e.left >= e.right) detail::bad_line(line_no, "left must be < right");
  if (e.bottom >= e.top) detail::bad_line(line_no, "bottom must be < top");
  if (e.page < 0) detail::bad_line(line_no, "negative page index");
  return e;
}

/// Entries in file order. Blank lines are skipped; a trailing CR on a line
/// is ignored.
inline std::vector<BoxEntry> parse_box_file(std::string_view content) {
  std::vector<BoxEntry> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    out.push_back(parse_box_line(line, line_no));
  }
  return out;
}

inline std::string serialize_box_file(const std::vector<BoxEntry>& entries) {
  std::ostringstream os;
  for (const auto& e : entries)
    os << e.glyph << ' ' << e.left << ' ' << e.bottom << ' ' << e.right << ' ' << e.top << ' ' << e.page << '\n';
  return os.str();
}

enum class FindingKind { OutOfBounds, Overlap, PageGap, BadLine };

constexpr std::string_view finding_name(FindingKind k) noexcept {
  switch (k) {
    case FindingKind::OutOfBounds: return "OutOfBounds";
    case FindingKind::Overlap: return "Overlap";
    case FindingKind::PageGap: return "PageGap";
    case FindingKind::BadLine: return "BadLine";
  }
  return "Unknown";
}

struct Finding {
  FindingKind kind;
  std::vector<std::size_t> entries;  // indices into the entry list; empty for PageGap
  std::string detail;

  friend bool operator==(const Finding&, const Finding&) = default;
};

/// Page size in pixels.
using PageDims = std::map<int, std::pair<int, int>>;

struct ValidateOptions {
  /// Overlap is reported when intersection / min(area) reaches this value.
  double overlap_threshold = 0.20;
};

/// Intersection area over the smaller box area.
inline double intersection_over_min(const BoxEntry& a, const BoxEntry& b) {
  const long long w = std::min(a.right, b.right) - std::max(a.left, b.left);
  const long long h = std::min(a.top, b.top) - std::max(a.bottom, b.bottom);
  if (w <= 0 || h <= 0) return 0.0;
  return static_cast<double>(w * h) / static_cast<double>(std::min(a.area(), b.area()));
}

/// Checks boxes against their page sizes and each other.
///
///  - OutOfBounds: a box extends past 0..width or 0..height of its page.
///  - Overlap: two boxes on one page intersect with IoM >= threshold.
///  - PageGap: the pages used do not form a contiguous 0..k range.
///
/// Findings are ordered by their first offending entry; PageGap comes last.
/// Throws UnknownPage if an entry's page is missing from `dims`.
inline std::vector<Finding> validate_boxes(const std::vector<BoxEntry>& entries, const PageDims& dims,
                                           const ValidateOptions& opts = {}) {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (!dims.count(entries[i].page))
      throw Error(Errc::UnknownPage, "entry " + std::to_string(i) + " references page " +
                                         std::to_string(entries[i].page) + " which the image does not have");

  std::vector<Finding> out;
  std::map<int, std::vector<std::size_t>> by_page;
  for (std::size_t i = 0; i < entries.size(); ++i) by_page[entries[i].page].push_back(i);

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const BoxEntry& e = entries[i];
    const auto [w, h] = dims.at(e.page);
    if (e.left < 0 || e.bottom < 0 || e.right > w || e.top > h) {
      std::ostringstream d;
      d << "box (" << e.left << ',' << e.bottom << ',' << e.right << ',' << e.top << ") exceeds page " << e.page
        << " size " << w << 'x' << h;
      out.push_back({FindingKind::OutOfBounds, {i}, d.str()});
    }
    for (std::size_t j : by_page[e.page]) {
      if (j <= i) continue;
      const double iom = intersection_over_min(e, entries[j]);
      if (iom > 0.0 && iom >= opts.overlap_threshold) {
        std::ostringstream d;
        d.precision(3);
        d << "'" << e.glyph << "' and '" << entries[j].glyph << "' overlap, IoM " << iom;
        out.push_back({FindingKind::Overlap, {i, j}, d.str()});
      }
    }
  }
  // Per-entry findings were produced in first-index order already.

  if (!by_page.empty()) {
    const int last = by_page.rbegin()->first;
    std::string missing;
    for (int p = 0; p <= last; ++p)
      if (!by_page.count(p)) missing += (missing.empty() ? "" : ",") + std::to_string(p);
    if (!missing.empty()) out.push_back({FindingKind::PageGap, {}, "no boxes on page(s) " + missing});
  }
  return out;
}

/// One TSV line: kind, comma-separated entry indices, detail.
inline std::string finding_tsv(const Finding& f) {
  std::string idx;
  for (std::size_t i : f.entries) idx += (idx.empty() ? "" : ",") + std::to_string(i);
  std::string detail = f.detail;
  std::replace(detail.begin(), detail.end(), '\t', ' ');
  std::replace(detail.begin(), detail.end(), '\n', ' ');
  return std::string(finding_name(f.kind)) + '\t' + idx + '\t' + detail;
}

/// Converts a box to top-left-origin raster coordinates on a page of the
/// given height: {x, y, w, h}.
inline std::array<int, 4> to_raster_box(const BoxEntry& e, int page_height) {
  return {e.left, page_height - e.top, e.right - e.left, e.top - e.bottom};
}

}  // namespace docext::groundtruth

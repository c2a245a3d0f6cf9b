///////////////////////////////////////////////////////////////////////
// File:        metrics.hpp
// Description: Character and word error rates built on unit-cost
//              Levenshtein alignment, plus per-font report aggregation.
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

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <ranges>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "docext/error.hpp"
#include "docext/unicode.hpp"

namespace docext::metrics {

/// Minimal edit decomposition of one alignment. `ref_len` is the number of
/// units in the reference.
struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;

  std::size_t distance() const noexcept { return substitutions + deletions + insertions; }

  friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

/// Unit-cost Levenshtein alignment of `ref` into `hyp`.
///
/// Each cell keeps the (S, D, I) triple of the preferred minimal path reaching
/// it, with predecessors tried in the order substitution/match, deletion,
/// insertion. That is the same decomposition a backtrace with the same
/// preference would recover, but needs only two rows of memory.
template <std::ranges::random_access_range Ref, std::ranges::random_access_range Hyp>
EditCounts edit_counts(const Ref& ref, const Hyp& hyp) {
  const std::size_t n = std::ranges::size(ref);
  const std::size_t m = std::ranges::size(hyp);
  auto rb = std::ranges::begin(ref);
  auto hb = std::ranges::begin(hyp);

  std::vector<EditCounts> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = {0, 0, j, 0};

  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = {0, i, 0, 0};
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = rb[static_cast<std::ptrdiff_t>(i - 1)] == hb[static_cast<std::ptrdiff_t>(j - 1)];
      EditCounts best = prev[j - 1];
      std::size_t best_cost = best.distance() + (same ? 0 : 1);
      if (!same) ++best.substitutions;

      const std::size_t del_cost = prev[j].distance() + 1;
      if (del_cost < best_cost) {
        best = prev[j];
        ++best.deletions;
        best_cost = del_cost;
      }
      const std::size_t ins_cost = cur[j - 1].distance() + 1;
      if (ins_cost < best_cost) {
        best = cur[j - 1];
        ++best.insertions;
      }
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  EditCounts out = prev[m];
  out.ref_len = n;
  return out;
}

/// How text is cut into characters for CER.
enum class CharUnit { CodePoint, Grapheme };

/// Half-up rounding to two decimals. The small bias absorbs binary
/// representation error so that e.g. 7.605 rounds to 7.61.
inline double round2(double v) { return std::floor(v * 100.0 + 0.5 + 1e-7) / 100.0; }

inline std::string format2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", round2(v));
  return buf;
}

/// Full-precision percentage 100 * (S + D + I) / N.
inline double error_percent(const EditCounts& c) {
  if (c.ref_len == 0) throw Error(Errc::EmptyReference, "reference has no units");
  return 100.0 * static_cast<double>(c.distance()) / static_cast<double>(c.ref_len);
}

inline EditCounts char_edit_counts(std::string_view ref, std::string_view hyp,
                                   CharUnit unit = CharUnit::CodePoint) {
  const std::string r = unicode::nfc(ref);
  const std::string h = unicode::nfc(hyp);
  if (unit == CharUnit::Grapheme) return edit_counts(unicode::graphemes(r), unicode::graphemes(h));
  return edit_counts(unicode::code_points(r), unicode::code_points(h));
}

inline EditCounts word_edit_counts(std::string_view ref, std::string_view hyp) {
  return edit_counts(unicode::split_whitespace(unicode::nfc(ref)),
                     unicode::split_whitespace(unicode::nfc(hyp)));
}

/// Character error rate in percent, rounded to two decimals.
inline double cer(std::string_view ref, std::string_view hyp, CharUnit unit = CharUnit::CodePoint) {
  return round2(error_percent(char_edit_counts(ref, hyp, unit)));
}

/// Word error rate in percent, rounded to two decimals. Words are maximal
/// runs between Unicode whitespace; punctuation stays attached.
inline double wer(std::string_view ref, std::string_view hyp) {
  return round2(error_percent(word_edit_counts(ref, hyp)));
}

struct EvalRow {
  std::string font_name;
  std::size_t noc = 0;  // reference characters
  std::size_t rc = 0;   // recognized characters
  double cer_pct = 0.0;
  double wer_pct = 0.0;
};

/// Scores one reference/hypothesis pair into a report row. Row values keep
/// full precision; rounding happens when the report is rendered.
inline EvalRow evaluate_pair(std::string font, std::string_view ref, std::string_view hyp,
                             CharUnit unit = CharUnit::CodePoint) {
  const EditCounts chars = char_edit_counts(ref, hyp, unit);
  EvalRow row;
  row.font_name = std::move(font);
  row.noc = chars.ref_len;
  row.rc = unit == CharUnit::Grapheme ? unicode::graphemes(unicode::nfc(hyp)).size()
                                      : unicode::code_points(unicode::nfc(hyp)).size();
  row.cer_pct = error_percent(chars);
  row.wer_pct = error_percent(word_edit_counts(ref, hyp));
  return row;
}

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_cer_pct = 0.0;
  double mean_wer_pct = 0.0;
};

inline EvalReport aggregate_report(std::vector<EvalRow> rows) {
  if (rows.empty()) throw Error(Errc::EmptyReport, "no evaluation rows");
  double cer_sum = 0.0, wer_sum = 0.0;
  for (const auto& r : rows) {
    cer_sum += r.cer_pct;
    wer_sum += r.wer_pct;
  }
  const auto n = static_cast<double>(rows.size());
  EvalReport rep;
  rep.mean_cer_pct = round2(cer_sum / n);
  rep.mean_wer_pct = round2(wer_sum / n);
  rep.rows = std::move(rows);
  return rep;
}

/// Absolute difference of report means (candidate minus baseline), in
/// percentage points. This is not a relative change.
struct MeanDelta {
  double cer_pts = 0.0;
  double wer_pts = 0.0;
};

inline MeanDelta mean_delta(const EvalReport& baseline, const EvalReport& candidate) {
  return {candidate.mean_cer_pct - baseline.mean_cer_pct,
          candidate.mean_wer_pct - baseline.mean_wer_pct};
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string signed2(double v) {
  const double r = v < 0 ? -round2(-v) : round2(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", r == 0.0 ? 0.0 : r);
  return buf;
}

}  // namespace detail

/// CSV with header `font,noc,rc,cer_pct,wer_pct` and a trailing MEAN row.
/// With a baseline, an `ABS_DELTA` row follows holding the absolute change
/// of the means in percentage points.
inline std::string report_csv(const EvalReport& rep, const EvalReport* baseline = nullptr) {
  std::ostringstream os;
  os << "font,noc,rc,cer_pct,wer_pct\n";
  for (const auto& r : rep.rows) {
    os << detail::csv_field(r.font_name) << ',' << r.noc << ',' << r.rc << ','
       << format2(r.cer_pct) << ',' << format2(r.wer_pct) << '\n';
  }
  os << "MEAN,,," << format2(rep.mean_cer_pct) << ',' << format2(rep.mean_wer_pct) << '\n';
  if (baseline) {
    const MeanDelta d = mean_delta(*baseline, rep);
    os << "ABS_DELTA,,," << detail::signed2(d.cer_pts) << ',' << detail::signed2(d.wer_pts) << '\n';
  }
  return os.str();
}

inline nlohmann::ordered_json report_json(const EvalReport& rep, const EvalReport* baseline = nullptr) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rep.rows) {
    j["rows"].push_back({{"font", r.font_name},
                         {"noc", r.noc},
                         {"rc", r.rc},
                         {"cer_pct", round2(r.cer_pct)},
                         {"wer_pct", round2(r.wer_pct)}});
  }
  j["mean"] = {{"cer_pct", rep.mean_cer_pct}, {"wer_pct", rep.mean_wer_pct}};
  if (baseline) {
    const MeanDelta d = mean_delta(*baseline, rep);
    j["abs_delta"] = {{"cer_pts", std::stod(detail::signed2(d.cer_pts))},
                      {"wer_pts", std::stod(detail::signed2(d.wer_pts))}};
  }
  return j;
}

/// Reads rows back from the CSV form. MEAN and ABS_DELTA rows are skipped
/// so a written report can be re-aggregated.
inline std::vector<EvalRow> parse_report_csv(std::string_view text) {
  std::vector<EvalRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || (line_no == 1 && line.starts_with("font,"))) continue;

    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(std::move(cur));
    if (fields.size() != 5)
      throw Error(Errc::BadLine, "report line " + std::to_string(line_no) + ": expected 5 fields")
          .with_line(line_no);
    if (fields[0] == "MEAN" || fields[0] == "ABS_DELTA") continue;
    try {
      EvalRow r;
      r.font_name = fields[0];
      r.noc = fields[1].empty() ? 0 : std::stoull(fields[1]);
      r.rc = fields[2].empty() ? 0 : std::stoull(fields[2]);
      r.cer_pct = std::stod(fields[3]);
      r.wer_pct = std::stod(fields[4]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(Errc::BadLine, "report line " + std::to_string(line_no) + ": bad number")
          .with_line(line_no);
    }
  }
  return rows;
}

}  // namespace docext::metrics

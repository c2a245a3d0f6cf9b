///////////////////////////////////////////////////////////////////////
// File:        corpus.hpp
// Description: Document-aligned multilingual corpus: alignment by file
//              name, sentence/word statistics, frequency ranking and
//              sentences-per-document histograms.
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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "docext/error.hpp"
#include "docext/metrics.hpp"
#include "docext/parallel.hpp"
#include "docext/unicode.hpp"

namespace docext::corpus {

namespace fs = std::filesystem;

/// Language code and its directory, in report order.
using LanguageDirs = std::vector<std::pair<std::string, fs::path>>;

struct DocumentTriple {
  std::string basename;
  std::map<std::string, fs::path> paths;  // language -> file
};

struct Alignment {
  std::vector<DocumentTriple> triples;
  /// (language, basename) of files that lack a counterpart in at least one
  /// other language.
  std::vector<std::pair<std::string, std::string>> unaligned;
};

/// Matches `<basename>.txt` files across exactly three language directories.
inline Alignment align_documents(const LanguageDirs& dirs) {
  if (dirs.size() != 3) throw Error(Errc::MissingDirectory, "expected exactly three language directories");
  std::vector<std::set<std::string>> names(dirs.size());
  for (std::size_t l = 0; l < dirs.size(); ++l) {
    const auto& [lang, dir] = dirs[l];
    if (!fs::is_directory(dir)) throw Error(Errc::MissingDirectory, lang + ": " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".txt") names[l].insert(entry.path().stem().string());
  }

  Alignment out;
  std::set<std::string> all;
  for (const auto& s : names) all.insert(s.begin(), s.end());
  for (const std::string& base : all) {
    const bool everywhere = std::all_of(names.begin(), names.end(), [&](const auto& s) { return s.count(base) > 0; });
    if (everywhere) {
      DocumentTriple t{base, {}};
      for (const auto& [lang, dir] : dirs) t.paths[lang] = dir / (base + ".txt");
      out.triples.push_back(std::move(t));
    } else {
      for (std::size_t l = 0; l < dirs.size(); ++l)
        if (names[l].count(base)) out.unaligned.emplace_back(dirs[l].first, base);
    }
  }
  std::sort(out.unaligned.begin(), out.unaligned.end());
  return out;
}

/// Sentences end at '.', '!' or '?' followed by whitespace or the end of
/// text, and at blank lines. Segments are trimmed; empty ones are dropped.
inline std::vector<std::string> segment_sentences(std::string_view text) {
  const std::u32string cps = unicode::code_points(text);
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string s = unicode::trim(unicode::to_utf8(std::u32string_view(cps).substr(start, end - start)));
    if (!s.empty()) out.push_back(std::move(s));
    start = end;
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if ((c == U'.' || c == U'!' || c == U'?') && (i + 1 == cps.size() || unicode::is_whitespace(cps[i + 1]))) {
      flush(i + 1);
    } else if (c == U'\n') {
      // Blank line: only horizontal whitespace up to the next newline.
      std::size_t j = i + 1;
      while (j < cps.size() && cps[j] != U'\n' && unicode::is_whitespace(cps[j])) ++j;
      if (j < cps.size() && cps[j] == U'\n') flush(i);
    }
  }
  flush(cps.size());
  return out;
}

/// NFC, split on Unicode whitespace, strip leading/trailing punctuation,
/// drop empties. No case folding.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (const std::string& raw : unicode::split_whitespace(unicode::nfc(text))) {
    const std::u32string cps = unicode::code_points(raw);
    std::size_t b = 0, e = cps.size();
    while (b < e && unicode::is_punctuation(cps[b])) ++b;
    while (e > b && unicode::is_punctuation(cps[e - 1])) --e;
    if (b < e) out.push_back(unicode::to_utf8(std::u32string_view(cps).substr(b, e - b)));
  }
  return out;
}

struct LanguageStats {
  std::string language;
  std::uint64_t nof = 0;   // files
  std::uint64_t nos = 0;   // sentences
  std::uint64_t now = 0;   // words
  std::uint64_t nouw = 0;  // unique words
  std::uint64_t ts_bytes = 0;
};

struct CorpusStats {
  std::vector<LanguageStats> languages;
};

/// Per-document counts for one file.
struct DocumentCounts {
  std::uint64_t sentences = 0;
  std::uint64_t bytes = 0;
  std::vector<std::string> tokens;
};

inline std::string read_text_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::UnreadableFile, p.string());
  return ss.str();
}

inline DocumentCounts count_document(const fs::path& p) {
  const std::string text = read_text_file(p);
  return {segment_sentences(text).size(), text.size(), tokenize(text)};
}

namespace detail {

/// Counts every document of `language` in parallel; results by triple index.
inline std::vector<DocumentCounts> count_language(const std::vector<DocumentTriple>& triples,
                                                  const std::string& language, unsigned parallelism) {
  std::vector<DocumentCounts> docs(triples.size());
  parallel_for(triples.size(), parallelism, [&](std::size_t i) {
    auto it = triples[i].paths.find(language);
    if (it == triples[i].paths.end()) throw Error(Errc::UnreadableFile, triples[i].basename + " has no " + language + " file");
    docs[i] = count_document(it->second);
  });
  return docs;
}

}  // namespace detail

/// Table of files, sentences, words, unique words and bytes per language,
/// in the order of `languages`.
inline CorpusStats corpus_stats(const std::vector<DocumentTriple>& triples, const std::vector<std::string>& languages,
                                unsigned parallelism = 0) {
  CorpusStats stats;
  for (const std::string& lang : languages) {
    LanguageStats s;
    s.language = lang;
    s.nof = triples.size();
    std::set<std::string> unique;
    for (auto& doc : detail::count_language(triples, lang, parallelism)) {
      s.nos += doc.sentences;
      s.now += doc.tokens.size();
      s.ts_bytes += doc.bytes;
      unique.insert(std::make_move_iterator(doc.tokens.begin()), std::make_move_iterator(doc.tokens.end()));
    }
    s.nouw = unique.size();
    stats.languages.push_back(std::move(s));
  }
  return stats;
}

/// Decimal megabytes with one decimal, e.g. "45.3MB".
inline std::string format_megabytes(std::uint64_t bytes) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fMB", static_cast<double>(bytes) / 1e6);
  return buf;
}

/// CSV columns: language,nof,nos,now,nouw,ts
inline std::string stats_csv(const CorpusStats& stats) {
  std::ostringstream os;
  os << "language,nof,nos,now,nouw,ts\n";
  for (const auto& s : stats.languages)
    os << s.language << ',' << s.nof << ',' << s.nos << ',' << s.now << ',' << s.nouw << ','
       << format_megabytes(s.ts_bytes) << '\n';
  return os.str();
}

inline nlohmann::ordered_json stats_json(const CorpusStats& stats) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& s : stats.languages)
    j.push_back({{"language", s.language},
                 {"nof", s.nof},
                 {"nos", s.nos},
                 {"now", s.now},
                 {"nouw", s.nouw},
                 {"ts", format_megabytes(s.ts_bytes)},
                 {"ts_bytes", s.ts_bytes}});
  return j;
}

using FrequencyTable = std::vector<std::pair<std::string, std::uint64_t>>;

/// Ranks tokens by count (descending), ties by code point order of the word.
/// UTF-8 byte order equals code point order, so plain string comparison
/// is used. top_k = 0 returns every word.
inline FrequencyTable rank_counts(const std::unordered_map<std::string, std::uint64_t>& counts, std::size_t top_k) {
  FrequencyTable table(counts.begin(), counts.end());
  std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (top_k && table.size() > top_k) table.resize(top_k);
  return table;
}

inline FrequencyTable frequency_table(const std::vector<DocumentTriple>& triples, const std::string& language,
                                      std::size_t top_k, unsigned parallelism = 0) {
  if (top_k < 1) throw Error(Errc::BadLine, "top_k must be >= 1");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (auto& doc : detail::count_language(triples, language, parallelism))
    for (auto& t : doc.tokens) ++counts[t];
  return rank_counts(counts, top_k);
}

/// Table-shaped side-by-side ranking: rank, then word,count per language.
inline std::string frequency_report_csv(const std::vector<std::string>& languages,
                                        const std::vector<FrequencyTable>& tables) {
  std::ostringstream os;
  os << "rank";
  for (const auto& l : languages) os << ',' << l << "_word," << l << "_count";
  os << '\n';
  std::size_t rows = 0;
  for (const auto& t : tables) rows = std::max(rows, t.size());
  for (std::size_t r = 0; r < rows; ++r) {
    os << r + 1;
    for (const auto& t : tables) {
      if (r < t.size())
        os << ',' << metrics::detail::csv_field(t[r].first) << ',' << t[r].second;
      else
        os << ",,";
    }
    os << '\n';
  }
  return os.str();
}

inline std::string frequency_csv(const FrequencyTable& table) {
  std::ostringstream os;
  os << "rank,word,count\n";
  for (std::size_t r = 0; r < table.size(); ++r)
    os << r + 1 << ',' << metrics::detail::csv_field(table[r].first) << ',' << table[r].second << '\n';
  return os.str();
}

/// Bin lower bound -> number of documents whose sentence count falls in
/// [bound, bound + bin_width).
using Histogram = std::map<std::uint64_t, std::uint64_t>;

inline Histogram sentence_density(const std::vector<DocumentTriple>& triples, const std::string& language,
                                  std::uint64_t bin_width, unsigned parallelism = 0) {
  if (bin_width < 1) throw Error(Errc::BadLine, "bin width must be >= 1");
  Histogram h;
  for (const auto& doc : detail::count_language(triples, language, parallelism))
    ++h[doc.sentences / bin_width * bin_width];
  return h;
}

inline std::string histogram_csv(const Histogram& h) {
  std::ostringstream os;
  os << "bin,count\n";
  for (const auto& [bin, count] : h) os << bin << ',' << count << '\n';
  return os.str();
}

}  // namespace docext::corpus
